#include "nsplab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "nsplab/errors.hpp"

namespace nsp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x)) throw InvalidArgument("not a finite number: '" + v + "'");
  return x;
}

template <class I>
I to_int(const std::string& v) {
  I x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw InvalidArgument("not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw InvalidArgument("not a boolean: '" + v + "'");
}

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NSP_DOUBLE(key, member) \
  {key, {[](RunConfig& c, const std::string& v) { c.member = to_double(v); }, [](const RunConfig& c) { return fmt(c.member); }}}
#define NSP_INT(key, member, T) \
  {key, {[](RunConfig& c, const std::string& v) { c.member = to_int<T>(v); }, [](const RunConfig& c) { return std::to_string(c.member); }}}
#define NSP_BOOL(key, member)                                                  \
  {key,                                                                        \
   {[](RunConfig& c, const std::string& v) { c.member = to_bool(v); }, [](const RunConfig& c) { \
      return std::string(c.member ? "true" : "false");                         \
    }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      NSP_INT("n", n, int),
      NSP_DOUBLE("L", L),
      NSP_DOUBLE("gamma", params.gamma),
      NSP_DOUBLE("nu1", params.nu1),
      NSP_DOUBLE("nu2", params.nu2),
      NSP_DOUBLE("beta", params.beta),
      NSP_DOUBLE("delta", params.delta_slack),
      NSP_DOUBLE("pressure_coeff", params.pressure_coeff),
      {"mode",
       {[](RunConfig& c, const std::string& v) {
          if (v == "quasineutral")
            c.params.regime = Regime::Quasineutral;
          else if (v == "zero-electron-mass")
            c.params.regime = Regime::ZeroElectronMass;
          else
            throw InvalidArgument("mode must be quasineutral or zero-electron-mass");
        },
        [](const RunConfig& c) {
          return std::string(c.params.regime == Regime::Quasineutral ? "quasineutral" : "zero-electron-mass");
        }}},
      {"epsilon_list",
       {[](RunConfig& c, const std::string& v) { c.epsilon_list = to_list(v); },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.epsilon_list.size(); ++i) s += (i ? "," : "") + fmt(c.epsilon_list[i]);
          return s;
        }}},
      NSP_DOUBLE("T", T),
      NSP_DOUBLE("dt_fraction", dt_fraction),
      {"splitting",
       {[](RunConfig& c, const std::string& v) {
          if (v == "acoustic-exponential")
            c.splitting = Splitting::AcousticExponential;
          else if (v == "fully-explicit")
            c.splitting = Splitting::FullyExplicit;
          else
            throw InvalidArgument("splitting must be acoustic-exponential or fully-explicit");
        },
        [](const RunConfig& c) {
          return std::string(c.splitting == Splitting::AcousticExponential ? "acoustic-exponential" : "fully-explicit");
        }}},
      NSP_BOOL("dealias", dealias),
      NSP_DOUBLE("cfl", cfl),
      NSP_INT("max_retries", max_retries, int),
      NSP_BOOL("noise", noise),
      NSP_INT("noise_K", noise_spec.K, int),
      NSP_DOUBLE("noise_decay_power", noise_spec.decay_power),
      NSP_DOUBLE("noise_box_lo", noise_spec.box_lo),
      NSP_DOUBLE("noise_box_hi", noise_spec.box_hi),
      NSP_INT("noise_mixing_seed", noise_spec.mixing_seed, std::uint64_t),
      NSP_DOUBLE("noise_alpha_scale", noise_spec.alpha_scale),
      NSP_DOUBLE("noise_b_scale", noise_spec.b_scale),
      NSP_INT("paths", paths, int),
      {"kappa_rule",
       {[](RunConfig& c, const std::string& v) {
          if (v == "paper")
            c.kappa_rule = KappaRule::EpsScaled;
          else if (v == "fixed")
            c.kappa_rule = KappaRule::Fixed;
          else
            throw InvalidArgument("kappa_rule must be paper or fixed");
        },
        [](const RunConfig& c) { return std::string(c.kappa_rule == KappaRule::EpsScaled ? "paper" : "fixed"); }}},
      NSP_DOUBLE("kappa", kappa),
      NSP_INT("seed", seed, std::uint64_t),
      {"output_dir",
       {[](RunConfig& c, const std::string& v) { c.output_dir = v; }, [](const RunConfig& c) { return c.output_dir; }}},
      NSP_DOUBLE("M", M),
      NSP_DOUBLE("sol_amplitude", initial.sol_amplitude),
      NSP_DOUBLE("grad_amplitude", initial.grad_amplitude),
      NSP_INT("kmax", initial.kmax, int),
      NSP_INT("threads", threads, int),
  };
  return f;
}

#undef NSP_DOUBLE
#undef NSP_INT
#undef NSP_BOOL

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("RunConfig: " + m); };
  if (n < 8 || n % 2 != 0) fail("n must be even and >= 8");
  if (!(L > 0.0)) fail("L must be positive");
  if (epsilon_list.empty()) fail("epsilon_list must not be empty");
  for (std::size_t i = 0; i < epsilon_list.size(); ++i) {
    if (!(epsilon_list[i] > 0.0)) fail("epsilon_list entries must be positive");
    if (i > 0 && !(epsilon_list[i] < epsilon_list[i - 1])) fail("epsilon_list must be strictly decreasing");
  }
  for (double e : epsilon_list) params_for(e).validate();
  if (!(T > 0.0)) fail("T must be positive");
  if (!(dt_fraction > 0.0 && dt_fraction <= 0.5)) fail("dt_fraction must lie in (0, 0.5]");
  if (!(cfl > 0.0)) fail("cfl must be positive");
  if (max_retries < 0 || max_retries > 20) fail("max_retries must lie in 0..20");
  noise_spec.validate();
  if (paths < 1) fail("paths must be >= 1");
  if (!(kappa > 0.0 && kappa < 1.0)) fail("kappa must lie in (0,1)");
  if (output_dir.empty()) fail("output_dir must not be empty");
  if (!(M >= 0.0)) fail("M must be >= 0");
  if (!(epsilon_list.front() * M < 1.0)) fail("eps * M must stay below 1 for a positive initial density");
  if (!(initial.sol_amplitude >= 0.0) || !(initial.grad_amplitude >= 0.0)) fail("initial amplitudes must be >= 0");
  if (initial.kmax < 1 || 3 * initial.kmax >= n) fail("kmax must satisfy 1 <= kmax < n/3");
  if (threads < 1) fail("threads must be >= 1");
}

PhysParams RunConfig::params_for(double epsilon) const {
  PhysParams p = params;
  p.epsilon = epsilon;
  return p;
}

double RunConfig::kappa_for(double epsilon) const {
  if (kappa_rule == KappaRule::Fixed) return kappa;
  return std::pow(epsilon, 2.0 * params.delta_slack * params.beta / 5.0);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> v;
    for (const auto& f : fields()) v.push_back(f.first);
    return v;
  }();
  return k;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, const Field*> index;
  for (const auto& [k, f] : fields()) index[k] = &f;
  RunConfig cfg;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) throw InvalidArgument(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw InvalidArgument(where + "repeated key '" + key + "'");
    try {
      it->second->set(cfg, value);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + key + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InvalidArgument("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(cfg) + "\n";
  return out;
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  if (dir.is_absolute()) return dir;
  const char* root = std::getenv(kOutputRootEnv);
  return (root && *root) ? std::filesystem::path(root) / dir : dir;
}

}  // namespace nsp
