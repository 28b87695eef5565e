#include "patrol/params.hpp"

#include "patrol/errors.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <utility>

namespace patrol {
namespace {

struct Field {
  std::function<double&(Params&)> ref_double;
  std::function<int&(Params&)> ref_int;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto d = [&](const char* name, double Params::*m) {
      t[name] = Field{[m](Params& p) -> double& { return p.*m; }, {}};
    };
    auto i = [&](const char* name, int Params::*m) {
      t[name] = Field{{}, [m](Params& p) -> int& { return p.*m; }};
    };
    d("v_max", &Params::v_max);
    d("R_b", &Params::R_b);
    d("D_s", &Params::D_s);
    d("R_c", &Params::R_c);
    d("R_t", &Params::R_t);
    d("T_wait", &Params::T_wait);
    i("l_max", &Params::l_max);
    d("T_pcr", &Params::T_pcr);
    d("T_ncr", &Params::T_ncr);
    d("T_sleep", &Params::T_sleep);
    d("f_patrol", &Params::f_patrol);
    d("T_idln", &Params::T_idln);
    d("T_exp", &Params::T_exp);
    i("d_full", &Params::d_full);
    d("d_max", &Params::d_max);
    d("alpha_max", &Params::alpha_max);
    d("R_v", &Params::R_v);
    d("R_l", &Params::R_l);
    d("lambda_z", &Params::lambda_z);
    d("lambda_t", &Params::lambda_t);
    d("epsilon", &Params::epsilon);
    d("max_step", &Params::max_step);
    i("max_children", &Params::max_children);
    d("budget_factor", &Params::budget_factor);
    i("window_attempts", &Params::window_attempts);
    d("window_pad", &Params::window_pad);
    d("eps_nbhd", &Params::eps_nbhd);
    d("exclusion", &Params::exclusion);
    i("k_nn", &Params::k_nn);
    d("w_terrain", &Params::w_terrain);
    d("w_ramp", &Params::w_ramp);
    d("w_surmountable", &Params::w_surmountable);
    d("stop_distance", &Params::stop_distance);
    d("interference_hz", &Params::interference_hz);
    d("record_hz", &Params::record_hz);
    d("Delta", &Params::Delta);
    d("deadlock_window", &Params::deadlock_window);
    d("eps_d", &Params::eps_d);
    d("position_noise", &Params::position_noise);
    return t;
  }();
  return table;
}

}  // namespace

void Params::set(const std::string& key, double value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw InputError("unknown parameter '" + key + "'");
  if (it->second.ref_double) {
    it->second.ref_double(*this) = value;
  } else {
    if (value != std::floor(value)) throw InputError("parameter '" + key + "' must be an integer");
    it->second.ref_int(*this) = static_cast<int>(value);
  }
}

double Params::get(const std::string& key) const {
  const auto it = fields().find(key);
  if (it == fields().end()) throw InputError("unknown parameter '" + key + "'");
  auto& self = const_cast<Params&>(*this);
  return it->second.ref_double ? it->second.ref_double(self) : it->second.ref_int(self);
}

const std::vector<std::string>& Params::names() {
  static const std::vector<std::string> n = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : fields()) v.push_back(k);
    return v;
  }();
  return n;
}

void Params::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw InputError(std::string("parameter ") + name + " must be > 0");
  };
  positive(v_max, "v_max");
  positive(R_b, "R_b");
  positive(D_s, "D_s");
  positive(R_c, "R_c");
  positive(R_t, "R_t");
  positive(R_v, "R_v");
  positive(R_l, "R_l");
  positive(max_step, "max_step");
  positive(T_exp, "T_exp");
  positive(T_idln, "T_idln");
  positive(Delta, "Delta");
  positive(eps_nbhd, "eps_nbhd");
  positive(interference_hz, "interference_hz");
  positive(record_hz, "record_hz");
  if (R_t < R_c) throw InputError("parameter R_t must be >= R_c");
  if (l_max < 1) throw InputError("parameter l_max must be >= 1");
  if (window_attempts < 1) throw InputError("parameter window_attempts must be >= 1");
  if (max_children < 1) throw InputError("parameter max_children must be >= 1");
  if (d_full < 1) throw InputError("parameter d_full must be >= 1");
}

std::pair<std::string, double> parse_param_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("expected KEY=VAL, got '" + text + "'");
  const std::string key = text.substr(0, eq);
  const std::string val = text.substr(eq + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
  if (ec != std::errc{} || ptr != val.data() + val.size())
    throw InputError("bad value in '" + text + "'");
  return {key, v};
}

}  // namespace patrol
