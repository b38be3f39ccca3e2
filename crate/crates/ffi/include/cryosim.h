#ifndef CRYOSIM_H
#define CRYOSIM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CryoStatus {
  CRYO_STATUS_OK = 0,
  CRYO_STATUS_NULL_POINTER = 1,
  CRYO_STATUS_INVALID_ARGUMENT = 2,
  CRYO_STATUS_PLANT_FAULT = 3,
  CRYO_STATUS_CALIBRATION_FAILED = 4,
  CRYO_STATUS_NON_CONVERGENCE = 5,
  CRYO_STATUS_PANIC = 6,
} CryoStatus;

/**
 * A PI loop (1-DOF or 2-DOF) with its memory.
 */
typedef struct CryoController CryoController;

/**
 * Plant parameters.
 */
typedef struct CryoParams CryoParams;

/**
 * A running plant: state plus the parameters it was created with.
 */
typedef struct CryoPlant CryoPlant;

/**
 * End-of-cycle telemetry; energies are per-cycle totals in J.
 */
typedef struct CryoSample {
  double t;
  double t_e;
  double t_c;
  double p_comp;
  double x;
  double x_amp;
  double w_comp;
  double w_exp;
  double q_rej;
  double q_bl;
  double q_ab;
} CryoSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread. Valid until the next
 * call into this library from the same thread; never NULL.
 */
const char *cryo_last_error(void);

/**
 * New parameter set holding the defaults. Free with [`cryo_params_free`].
 */
struct CryoParams *cryo_params_new(void);

/**
 * # Safety
 * `p` is NULL or a handle from [`cryo_params_new`] not yet freed.
 */
void cryo_params_free(struct CryoParams *p);

/**
 * Sets a parameter by its config-file name (`k_m`, `ua_rej`, ...). The
 * whole set is validated afterwards and left unchanged on failure.
 *
 * # Safety
 * `p` is a live handle; `key` is a NUL-terminated string.
 */
enum CryoStatus cryo_params_set(struct CryoParams *p, const char *key, double value);

/**
 * # Safety
 * `p` is a live handle; `key` is a NUL-terminated string; `out` is writable.
 */
enum CryoStatus cryo_params_get(const struct CryoParams *p, const char *key, double *out);

/**
 * Runs from ambient at a fixed drive amplitude and load until T_E settles.
 *
 * # Safety
 * `p` is a live handle; `t_e` and `t_c` are writable.
 */
enum CryoStatus cryo_steady_state(const struct CryoParams *p,
                                  double i_amp,
                                  double q_ab,
                                  double *t_e,
                                  double *t_c);

/**
 * New plant at ambient equilibrium, copying the parameters. Free with
 * [`cryo_plant_free`].
 *
 * # Safety
 * `p` is a live handle; `out` is writable.
 */
enum CryoStatus cryo_plant_new(const struct CryoParams *p, struct CryoPlant **out);

/**
 * # Safety
 * `s` is NULL or a handle from [`cryo_plant_new`] not yet freed.
 */
void cryo_plant_free(struct CryoPlant *s);

/**
 * Advances one drive period. On failure the plant keeps its previous state.
 *
 * # Safety
 * `s` is a live handle; `sample` is NULL or writable.
 */
enum CryoStatus cryo_plant_step(struct CryoPlant *s,
                                double i_amp,
                                double q_ab,
                                struct CryoSample *sample);

/**
 * Current cold-tip temperature, or NaN for a NULL handle.
 *
 * # Safety
 * `s` is NULL or a live handle.
 */
double cryo_plant_t_e(const struct CryoPlant *s);

/**
 * New PI loop. `two_dof` selects the set-point filter with coefficient `a`
 * (ignored otherwise). The integrator starts at `u0` for a bumpless start.
 *
 * # Safety
 * `out` is writable.
 */
enum CryoStatus cryo_controller_new(bool two_dof,
                                    double k_p,
                                    double k_i,
                                    double ts,
                                    double u_min,
                                    double u_max,
                                    double a,
                                    double error_scale,
                                    double u0,
                                    struct CryoController **out);

/**
 * # Safety
 * `c` is NULL or a handle from [`cryo_controller_new`] not yet freed.
 */
void cryo_controller_free(struct CryoController *c);

/**
 * One controller tick on set-point `sp` and measurement `pv` (K). Writes
 * the drive amplitude command and the set-point seen by the PI.
 *
 * # Safety
 * `c` is a live handle; `u` is writable; `sp_f` is NULL or writable.
 */
enum CryoStatus cryo_controller_step(struct CryoController *c,
                                     double sp,
                                     double pv,
                                     double *u,
                                     double *sp_f);

/**
 * τ_f = −Ts/ln(a) of the set-point filter.
 *
 * # Safety
 * `out` is writable.
 */
enum CryoStatus cryo_filter_time_constant(double a, double ts, double *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cryo_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRYOSIM_H */
