/* adiasim - event-driven simulators for slowly varying impact systems
 * (bouncing particle with a moving wall, irregular planar waveguide,
 * massive piston in a particle gas) with adiabatic-invariant diagnostics.
 *
 * C API over the C++ core: opaque handles, integer status codes, and a
 * thread-local error message. Every object returned through an out-pointer
 * is owned by the caller and released with the matching _free function.
 */
#ifndef ADIASIM_H
#define ADIASIM_H

#include <stddef.h>

#if defined(_WIN32)
#define ADIA_API __declspec(dllexport)
#else
#define ADIA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum adia_status {
  ADIA_OK = 0,
  ADIA_ERR_PARSE = 1,
  ADIA_ERR_DOMAIN = 2,
  ADIA_ERR_CONFIG = 3,
  ADIA_ERR_SIMULATION = 4,
  ADIA_ERR_IO = 5,
  ADIA_ERR_INVALID_ARGUMENT = 6,
  ADIA_ERR_INTERNAL = 7
} adia_status;

typedef struct adia_profile adia_profile;
typedef struct adia_scenario adia_scenario;
typedef struct adia_report adia_report;

ADIA_API const char* adia_version(void);
ADIA_API const char* adia_status_name(adia_status status);

/* Message for the most recent failure on this thread; empty string when the
 * last call succeeded. The pointer stays valid until the next API call on
 * the same thread. */
ADIA_API const char* adia_last_error(void);

/* --- Wall profiles d(.) ---------------------------------------------------
 * Expressions over `tau` with +,-,*,/,^, unary minus, sin, cos, tan, exp,
 * tanh, sqrt, atan and the constants pi, e. Evaluation returns the value and
 * its first two derivatives with respect to tau (exact forward-mode duals).
 */
ADIA_API adia_status adia_profile_parse(const char* source, adia_profile** out);
ADIA_API void adia_profile_free(adia_profile* profile);
ADIA_API adia_status adia_profile_eval(const adia_profile* profile, double tau, double* d,
                                       double* d1, double* d2);
/* Dense positivity check on [tau_lo, tau_hi]: accepts iff min d >= d_min.
 * Returns ADIA_ERR_DOMAIN on rejection; min_d/tau_at_min are filled either
 * way when non-NULL. */
ADIA_API adia_status adia_profile_check_positive(const adia_profile* profile, double tau_lo,
                                                 double tau_hi, double d_min, double* min_d,
                                                 double* tau_at_min);
/* Round-trippable text form; caller frees with adia_string_free. */
ADIA_API adia_status adia_profile_format(const adia_profile* profile, char** out);
ADIA_API void adia_string_free(char* text);

/* --- Scenarios and runs ----------------------------------------------------
 * A scenario is the JSON configuration documented in the README (system,
 * profile, eps, initial conditions, horizon, optional sweep grid). Commands:
 * "simulate", "sweep", "compare-effective", "classify". Artifacts (CSV
 * series, JSON report) are written under out_dir.
 */
ADIA_API adia_status adia_scenario_load_file(const char* path, adia_scenario** out);
ADIA_API adia_status adia_scenario_load_json(const char* json_text, adia_scenario** out);
ADIA_API void adia_scenario_free(adia_scenario* scenario);
ADIA_API const char* adia_scenario_system(const adia_scenario* scenario);

ADIA_API adia_status adia_run(const adia_scenario* scenario, const char* command,
                              const char* out_dir, int jobs, unsigned long long seed,
                              adia_report** out);
ADIA_API const char* adia_report_json(const adia_report* report);
ADIA_API const char* adia_report_summary(const adia_report* report);
ADIA_API void adia_report_free(adia_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ADIASIM_H */
