#ifndef PRICE_LAB_H
#define PRICE_LAB_H

/* Generated by cbindgen from the price-lab-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_DOMAIN = 2,
  PL_STATUS_UNSUPPORTED = 3,
  PL_STATUS_SINGULAR_BOUNDARY = 4,
  PL_STATUS_NUMERICAL_VIOLATION = 5,
  PL_STATUS_NON_CONVERGENCE = 6,
  PL_STATUS_PARAMETER_CONFLICT = 7,
  PL_STATUS_PRECONDITION = 8,
  PL_STATUS_NOT_FINITE_ENERGY = 9,
  PL_STATUS_INVALID_JSON = 10,
  PL_STATUS_PANIC = 11,
} PlStatus;

/**
 * Opaque harmonic function.
 */
typedef struct PlHarmonic PlHarmonic;

/**
 * Opaque growth profile.
 */
typedef struct PlProfile PlProfile;

typedef struct PlSample {
  double radius;
  double sphere_energy;
  double ball_energy;
  double dirichlet;
  double iterated;
  double mu;
  double almgren;
} PlSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *pl_last_error_message(void);

/**
 * Builds a function from JSON such as
 * `{"kind": "poisson", "atoms": [{"axis": 0}]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PlStatus pl_harmonic_from_json(size_t dim,
                                    double curvature,
                                    const char *json,
                                    struct PlHarmonic **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_harmonic_constant(size_t dim,
                                   double curvature,
                                   double value,
                                   struct PlHarmonic **out);

/**
 * Poisson kernel with its pole at the unit vector of coordinate `axis`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_harmonic_poisson_atom(size_t dim,
                                       double curvature,
                                       size_t axis,
                                       struct PlHarmonic **out);

/**
 * Axial harmonic polynomial of the given degree about the first axis.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_harmonic_axial(size_t dim,
                                double curvature,
                                size_t degree,
                                struct PlHarmonic **out);

/**
 * # Safety
 * `h` must come from a `pl_harmonic_*` constructor and not be freed twice.
 */
void pl_harmonic_free(struct PlHarmonic *h);

/**
 * # Safety
 * `h` must be a live handle and `x` must point to `len` doubles.
 */
enum PlStatus pl_harmonic_evaluate(const struct PlHarmonic *h,
                                   const double *x,
                                   size_t len,
                                   double *out);

/**
 * Coordinate gradient into `grad` (`len` entries) and the squared norm in
 * the model metric into `norm_sq`.
 *
 * # Safety
 * `h` must be a live handle; `x` and `grad` must point to `len` doubles.
 */
enum PlStatus pl_harmonic_gradient(const struct PlHarmonic *h,
                                   const double *x,
                                   size_t len,
                                   double *grad,
                                   double *norm_sq);

/**
 * Mean curvature of the geodesic sphere of radius `r`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_mean_curvature(size_t dim, double curvature, double r, double *out);

/**
 * Area of the geodesic sphere of radius `r`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_sphere_area(size_t dim, double curvature, double r, double *out);

/**
 * Volume of the geodesic ball of radius `r`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_ball_volume(size_t dim, double curvature, double r, double *out);

/**
 * Poincaré-ball radius of the geodesic sphere of radius `r`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_geodesic_to_ball_radius(size_t dim, double curvature, double r, double *out);

double pl_mu_closed_form(size_t degree, size_t dim);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_hyp2f1_terminating(int64_t a, double b, double c, double z, double *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_q_closed_form(size_t dim, double r, double c1, double *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum PlStatus pl_calibrate_c1(size_t dim, double *out);

/**
 * Writes the `2 dim - 1` coefficients of the calibrated exponential-sum form
 * into `alpha`, which must hold `capacity >= 2 dim - 1` doubles.
 *
 * # Safety
 * `alpha` must point to `capacity` doubles.
 */
enum PlStatus pl_q_coefficients(size_t dim, double c1, double *alpha, size_t capacity);

/**
 * Growth profile on `len` increasing radii. A non-positive `target_rel_tol`
 * selects the default quadrature settings.
 *
 * # Safety
 * `h` must be a live handle, `radii` must point to `len` doubles and `out`
 * must be a valid pointer.
 */
enum PlStatus pl_growth_profile(const struct PlHarmonic *h,
                                const double *radii,
                                size_t len,
                                double target_rel_tol,
                                struct PlProfile **out);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live profile.
 */
size_t pl_profile_len(const struct PlProfile *p);

/**
 * # Safety
 * `p` must be a live profile and `out` a valid pointer.
 */
enum PlStatus pl_profile_sample(const struct PlProfile *p, size_t index, struct PlSample *out);

/**
 * # Safety
 * `p` must come from `pl_growth_profile` and not be freed twice.
 */
void pl_profile_free(struct PlProfile *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRICE_LAB_H */
