#include "adiasim.h"

#include <cstring>
#include <new>
#include <string>

#include "error.hpp"
#include "profile.hpp"
#include "scenario.hpp"

using namespace adiasim;

struct adia_profile {
  Profile impl;
};

struct adia_scenario {
  ScenarioConfig impl;
};

struct adia_report {
  RunReport impl;
};

namespace {

thread_local std::string g_last_error;

adia_status to_status(Errc code) {
  switch (code) {
    case Errc::parse: return ADIA_ERR_PARSE;
    case Errc::domain: return ADIA_ERR_DOMAIN;
    case Errc::config: return ADIA_ERR_CONFIG;
    case Errc::simulation: return ADIA_ERR_SIMULATION;
    case Errc::io: return ADIA_ERR_IO;
    case Errc::invalid_argument: return ADIA_ERR_INVALID_ARGUMENT;
    case Errc::internal: return ADIA_ERR_INTERNAL;
  }
  return ADIA_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes + the thread-local
// message. fn returns ADIA_OK on success.
template <typename Fn>
adia_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ADIA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ADIA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ADIA_ERR_INTERNAL;
  }
}

adia_status invalid(const char* message) {
  g_last_error = message;
  return ADIA_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

const char* adia_version(void) { return "1.0.0"; }

const char* adia_status_name(adia_status status) {
  switch (status) {
    case ADIA_OK: return "ok";
    case ADIA_ERR_PARSE: return "parse_error";
    case ADIA_ERR_DOMAIN: return "domain_error";
    case ADIA_ERR_CONFIG: return "config_error";
    case ADIA_ERR_SIMULATION: return "simulation_error";
    case ADIA_ERR_IO: return "io_error";
    case ADIA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ADIA_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* adia_last_error(void) { return g_last_error.c_str(); }

adia_status adia_profile_parse(const char* source, adia_profile** out) {
  if (!source || !out) return invalid("adia_profile_parse: NULL argument");
  return guarded([&] {
    auto* handle = new adia_profile{Profile::parse(source)};
    *out = handle;
    return ADIA_OK;
  });
}

void adia_profile_free(adia_profile* profile) { delete profile; }

adia_status adia_profile_eval(const adia_profile* profile, double tau, double* d, double* d1,
                              double* d2) {
  if (!profile) return invalid("adia_profile_eval: NULL profile");
  return guarded([&] {
    const ProfileValue v = profile->impl.eval(tau);
    if (d) *d = v.d;
    if (d1) *d1 = v.d1;
    if (d2) *d2 = v.d2;
    return ADIA_OK;
  });
}

adia_status adia_profile_check_positive(const adia_profile* profile, double tau_lo, double tau_hi,
                                        double d_min, double* min_d, double* tau_at_min) {
  if (!profile) return invalid("adia_profile_check_positive: NULL profile");
  return guarded([&] {
    const PositivityReport rep = profile->impl.check_positive(tau_lo, tau_hi, d_min);
    if (min_d) *min_d = rep.min_d;
    if (tau_at_min) *tau_at_min = rep.tau_min;
    if (!rep.accepted) {
      g_last_error = "profile dips below the required minimum";
      return ADIA_ERR_DOMAIN;
    }
    return ADIA_OK;
  });
}

adia_status adia_profile_format(const adia_profile* profile, char** out) {
  if (!profile || !out) return invalid("adia_profile_format: NULL argument");
  return guarded([&] {
    const std::string text = profile->impl.format();
    char* buf = static_cast<char*>(::operator new(text.size() + 1));
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
    return ADIA_OK;
  });
}

void adia_string_free(char* text) { ::operator delete(text); }

adia_status adia_scenario_load_file(const char* path, adia_scenario** out) {
  if (!path || !out) return invalid("adia_scenario_load_file: NULL argument");
  return guarded([&] {
    auto* handle = new adia_scenario{load_config_file(path)};
    *out = handle;
    return ADIA_OK;
  });
}

adia_status adia_scenario_load_json(const char* json_text, adia_scenario** out) {
  if (!json_text || !out) return invalid("adia_scenario_load_json: NULL argument");
  return guarded([&] {
    auto* handle = new adia_scenario{load_config_json(json_text)};
    *out = handle;
    return ADIA_OK;
  });
}

void adia_scenario_free(adia_scenario* scenario) { delete scenario; }

const char* adia_scenario_system(const adia_scenario* scenario) {
  return scenario ? system_name(scenario->impl.system) : "";
}

adia_status adia_run(const adia_scenario* scenario, const char* command, const char* out_dir,
                     int jobs, unsigned long long seed, adia_report** out) {
  if (!scenario || !command || !out_dir || !out) return invalid("adia_run: NULL argument");
  return guarded([&] {
    auto* handle = new adia_report{run_command(scenario->impl, command, out_dir, jobs, seed)};
    *out = handle;
    return ADIA_OK;
  });
}

const char* adia_report_json(const adia_report* report) {
  return report ? report->impl.json.c_str() : "";
}

const char* adia_report_summary(const adia_report* report) {
  return report ? report->impl.summary.c_str() : "";
}

void adia_report_free(adia_report* report) { delete report; }

} // extern "C"
