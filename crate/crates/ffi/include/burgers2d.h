#ifndef BURGERS2D_H
#define BURGERS2D_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum B2dRegion {
  B2D_REGION_MINUS = 0,
  B2D_REGION_FAN = 1,
  B2D_REGION_PLUS = 2,
} B2dRegion;

/**
 * Result of a fallible call.
 */
typedef enum B2dStatus {
  B2D_STATUS_OK = 0,
  B2D_STATUS_INVALID_ARGUMENT = 1,
  B2D_STATUS_HYPERBOLICITY_VIOLATED = 2,
  B2D_STATUS_NO_CONVERGENCE = 3,
  B2D_STATUS_NUMERICAL_FAILURE = 4,
  B2D_STATUS_IO = 5,
  B2D_STATUS_NULL_POINTER = 6,
  B2D_STATUS_PANIC = 7,
} B2dStatus;

/**
 * Opaque curve handle.
 */
typedef struct B2dCurve B2dCurve;

/**
 * Opaque grid field handle.
 */
typedef struct B2dField B2dField;

/**
 * Opaque viscous profile handle.
 */
typedef struct B2dProfile B2dProfile;

/**
 * Opaque handle for end states plus curve.
 */
typedef struct B2dRiemann B2dRiemann;

/**
 * Coefficients of the transformed equation at one `xi`.
 */
typedef struct B2dCoefficients {
  double xi;
  double k;
  double a;
  double b;
  double k_prime;
  /**
   * Smaller eigenvalue of the diffusion matrix at `xi`.
   */
  double d;
} B2dCoefficients;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *b2d_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *b2d_version(void);

/**
 * Line `y = k x + c`; needs `k < 1`.
 */
enum B2dStatus b2d_curve_line(double k, double c, struct B2dCurve **out);

/**
 * Broken line `k1 x + c1` / `k2 x + c2` smoothed over `[-eps0, eps0]`.
 */
enum B2dStatus b2d_curve_mollified_polyline(double k1,
                                            double c1,
                                            double k2,
                                            double c2,
                                            double eps0,
                                            struct B2dCurve **out);

/**
 * `k x + c + amplitude atan(x / width)`.
 */
enum B2dStatus b2d_curve_perturbed_line(double k,
                                        double c,
                                        double amplitude,
                                        double width,
                                        struct B2dCurve **out);

void b2d_curve_free(struct B2dCurve *curve);

/**
 * `phi`, `phi'` and `phi''` at `x`; any out-pointer may be null.
 */
enum B2dStatus b2d_curve_eval(const struct B2dCurve *curve,
                              double x,
                              double *phi,
                              double *dphi,
                              double *ddphi);

/**
 * Hyperbolicity margin `d0`.
 */
enum B2dStatus b2d_curve_d0(const struct B2dCurve *curve, double *out);

/**
 * `Z(x, y)`, the root of `y - Z = phi(x - Z)`.
 */
enum B2dStatus b2d_curve_solve_z(const struct B2dCurve *curve, double x, double y, double *out);

/**
 * `G(xi)`, the root of `G - phi(G) = xi`.
 */
enum B2dStatus b2d_curve_solve_g(const struct B2dCurve *curve, double xi, double *out);

enum B2dStatus b2d_coefficients(const struct B2dCurve *curve,
                                double xi,
                                struct B2dCoefficients *out);

/**
 * Ellipticity constant of the curve.
 */
enum B2dStatus b2d_ellipticity_constant(const struct B2dCurve *curve, double *out);

/**
 * End states `u_minus < u_plus` over a copy of `curve`.
 */
enum B2dStatus b2d_riemann_new(double u_minus,
                               double u_plus,
                               const struct B2dCurve *curve,
                               struct B2dRiemann **out);

void b2d_riemann_free(struct B2dRiemann *data);

/**
 * Inviscid wave at `(t, x, y)`, `t > 0`.
 */
enum B2dStatus b2d_rarefaction_eval(const struct B2dRiemann *data,
                                    double t,
                                    double x,
                                    double y,
                                    double *out);

enum B2dStatus b2d_classify_region(const struct B2dRiemann *data,
                                   double t,
                                   double x,
                                   double y,
                                   enum B2dRegion *out);

/**
 * Viscous profile with the smooth initial datum `w0` joining `u_minus`
 * and `u_plus`.
 */
enum B2dStatus b2d_profile_new(double u_minus, double u_plus, struct B2dProfile **out);

void b2d_profile_free(struct B2dProfile *profile);

enum B2dStatus b2d_profile_w0(const struct B2dProfile *profile, double eta, double *out);

/**
 * Inviscid solution `w(t, eta)` with datum `w0`.
 */
enum B2dStatus b2d_profile_eval_w(const struct B2dProfile *profile,
                                  double t,
                                  double eta,
                                  double *out);

/**
 * Viscous profile `v(t, xi, eta)` for the coefficients of `curve`.
 */
enum B2dStatus b2d_profile_eval_v(const struct B2dProfile *profile,
                                  double t,
                                  double xi,
                                  double eta,
                                  const struct B2dCurve *curve,
                                  double *out);

/**
 * Reads a field dump written by the `burgers2d` tool.
 */
enum B2dStatus b2d_field_read(const char *path, struct B2dField **out);

enum B2dStatus b2d_field_write(const struct B2dField *field, const char *path);

void b2d_field_free(struct B2dField *field);

/**
 * Node counts and snapshot time; any out-pointer may be null.
 */
enum B2dStatus b2d_field_info(const struct B2dField *field, size_t *n1, size_t *n2, double *time);

/**
 * Bounds `[lo1, hi1] x [lo2, hi2]` of the grid.
 */
enum B2dStatus b2d_field_bounds(const struct B2dField *field, double (*bounds)[4]);

/**
 * Row-major values (`n1 * n2`, first axis fastest), owned by the field.
 */
const double *b2d_field_values(const struct B2dField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BURGERS2D_H */
