#include "nsplab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "nsplab/errors.hpp"

namespace nsp {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text, const char* header, const char* what) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty() || lines.front() != header)
    throw SchemaError(std::string(what) + ": header mismatch, expected '" + header + "'");
  lines.erase(lines.begin());
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

void require_plain(const std::string& s, const char* what) {
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw InvalidArgument(std::string(what) + " must not contain commas, quotes or newlines: '" + s + "'");
}

std::vector<std::string> fields_of(const std::string& line, std::size_t count, const char* what) {
  auto f = split(line);
  if (f.size() != count) throw SchemaError(std::string(what) + ": wrong field count in row '" + line + "'");
  return f;
}

int parse_int(const std::string& s) {
  int x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw SchemaError("not an integer: '" + s + "'");
  return x;
}

long long parse_ll(const std::string& s) {
  long long x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw SchemaError("not an integer: '" + s + "'");
  return x;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw SchemaError("not a boolean: '" + s + "'");
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw SchemaError("not a number: '" + s + "'");
  return x;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) {
    require_plain(r.run_id, "run_id");
    require_plain(r.metric, "metric");
    out += r.run_id + "," + format_double(r.epsilon) + "," + std::to_string(r.path) + "," + r.metric + "," +
           format_double(r.value) + "\n";
  }
  return out;
}

std::vector<MetricRow> parse_metrics_csv(const std::string& text) {
  std::vector<MetricRow> rows;
  for (const auto& line : lines_of(text, kMetricsHeader, "metrics.csv")) {
    const auto f = fields_of(line, 5, "metrics.csv");
    rows.push_back({f[0], parse_double(f[1]), parse_int(f[2]), f[3], parse_double(f[4])});
  }
  return rows;
}

std::string rates_csv(const std::vector<RateReport>& reports) {
  std::string out = std::string(kRatesHeader) + "\n";
  for (const auto& r : reports) {
    require_plain(r.quantity, "quantity");
    out += r.quantity + "," + format_double(r.predicted_exponent) + "," + format_double(r.slope) + "," +
           format_double(r.r_squared) + "," + (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::vector<RateReport> parse_rates_csv(const std::string& text) {
  std::vector<RateReport> out;
  for (const auto& line : lines_of(text, kRatesHeader, "rates.csv")) {
    const auto f = fields_of(line, 5, "rates.csv");
    RateReport r;
    r.quantity = f[0];
    r.predicted_exponent = parse_double(f[1]);
    r.slope = parse_double(f[2]);
    r.r_squared = parse_double(f[3]);
    r.pass = parse_bool(f[4]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string ledger_csv(const EnergyLedger& ledger) {
  std::string out = std::string(kLedgerHeader) + "\n";
  for (const auto& r : ledger.rows)
    out += std::to_string(r.step) + "," + format_double(r.time) + "," + format_double(r.energy.kinetic) + "," +
           format_double(r.energy.internal) + "," + format_double(r.energy.electric) + "," +
           format_double(r.dissipation_cum) + "," + format_double(r.ito_cum) + "," + format_double(r.martingale_cum) +
           "," + format_double(r.violation) + "\n";
  return out;
}

std::vector<LedgerRow> parse_ledger_csv(const std::string& text) {
  std::vector<LedgerRow> rows;
  for (const auto& line : lines_of(text, kLedgerHeader, "ledger.csv")) {
    const auto f = fields_of(line, 9, "ledger.csv");
    LedgerRow r;
    r.step = parse_ll(f[0]);
    r.time = parse_double(f[1]);
    r.energy = {parse_double(f[2]), parse_double(f[3]), parse_double(f[4])};
    r.dissipation_cum = parse_double(f[5]);
    r.ito_cum = parse_double(f[6]);
    r.martingale_cum = parse_double(f[7]);
    r.violation = parse_double(f[8]);
    rows.push_back(r);
  }
  return rows;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + file.string());
  out << text;
  if (!out) throw InvalidArgument("write failed: " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

const std::vector<std::string> kCheckpointFields{"rho", "m1", "m2", "m3", "V"};

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) return x;
  std::uint64_t y = 0;
  for (int b = 0; b < 8; ++b) y |= ((x >> (8 * b)) & 0xff) << (8 * (7 - b));
  return y;
}

void put_array(std::ofstream& out, const std::vector<double>& v) {
  for (double x : v) {
    std::uint64_t u = to_le(std::bit_cast<std::uint64_t>(x));
    out.write(reinterpret_cast<const char*>(&u), 8);
  }
}

std::vector<double> get_array(const std::string& bytes, std::size_t offset, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t u;
    std::memcpy(&u, bytes.data() + offset + 8 * i, 8);
    v[i] = std::bit_cast<double>(to_le(u));
  }
  return v;
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* s) {
  return std::filesystem::path(base.string() + s);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& base, const FluidState& s, const PhysParams& p) {
  const auto& g = *s.rho.grid;
  const std::size_t N = g.real_size();
  const std::vector<const std::vector<double>*> arrays{&s.rho.values, &s.momentum.comp[0], &s.momentum.comp[1],
                                                       &s.momentum.comp[2], &s.potential.values};
  for (const auto* a : arrays)
    if (a->size() != N) throw InvalidArgument("write_checkpoint: incomplete state");
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  {
    std::ofstream out(with_suffix(base, ".bin"), std::ios::binary);
    if (!out) throw InvalidArgument("cannot write checkpoint " + base.string());
    for (const auto* a : arrays) put_array(out, *a);
  }
  std::string m = "nsplab-checkpoint " + std::to_string(kCheckpointVersion) + "\n";
  m += "n = " + std::to_string(g.n()) + "\n";
  m += "L = " + format_double(g.box_length()) + "\n";
  m += "gamma = " + format_double(p.gamma) + "\n";
  m += "nu1 = " + format_double(p.nu1) + "\n";
  m += "nu2 = " + format_double(p.nu2) + "\n";
  m += "epsilon = " + format_double(p.epsilon) + "\n";
  m += "beta = " + format_double(p.beta) + "\n";
  m += "delta = " + format_double(p.delta_slack) + "\n";
  m += "pressure_coeff = " + format_double(p.pressure_coeff) + "\n";
  m += std::string("mode = ") + (p.regime == Regime::Quasineutral ? "quasineutral" : "zero-electron-mass") + "\n";
  m += "time = " + format_double(s.time) + "\n";
  m += std::string("potential_consistent = ") + (s.potential_consistent ? "true" : "false") + "\n";
  std::string list;
  for (std::size_t f = 0; f < kCheckpointFields.size(); ++f) list += (f ? "," : "") + kCheckpointFields[f];
  m += "fields = " + list + "\n";
  for (std::size_t f = 0; f < kCheckpointFields.size(); ++f)
    m += "offset " + kCheckpointFields[f] + " = " + std::to_string(8 * N * f) + "\n";
  write_text(with_suffix(base, ".manifest"), m);
}

Checkpoint read_checkpoint(const std::filesystem::path& base) {
  std::string text;
  try {
    text = read_text(with_suffix(base, ".manifest"));
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  const std::string magic = "nsplab-checkpoint ";
  if (line.rfind(magic, 0) != 0) throw SchemaError("checkpoint manifest: missing 'nsplab-checkpoint' header");
  const int version = parse_int(line.substr(magic.size()));
  if (version != kCheckpointVersion)
    throw SchemaError("checkpoint manifest: version " + std::to_string(version) + ", this build reads version " +
                      std::to_string(kCheckpointVersion));
  std::map<std::string, std::string> kv;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw SchemaError("checkpoint manifest: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto get = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw SchemaError("checkpoint manifest: missing key '" + k + "'");
    return it->second;
  };
  const auto fields = split(get("fields"));
  if (fields != kCheckpointFields) throw SchemaError("checkpoint manifest: unexpected field list '" + get("fields") + "'");

  Checkpoint c;
  c.params.gamma = parse_double(get("gamma"));
  c.params.nu1 = parse_double(get("nu1"));
  c.params.nu2 = parse_double(get("nu2"));
  c.params.epsilon = parse_double(get("epsilon"));
  c.params.beta = parse_double(get("beta"));
  c.params.delta_slack = parse_double(get("delta"));
  c.params.pressure_coeff = parse_double(get("pressure_coeff"));
  const auto mode = get("mode");
  if (mode == "quasineutral")
    c.params.regime = Regime::Quasineutral;
  else if (mode == "zero-electron-mass")
    c.params.regime = Regime::ZeroElectronMass;
  else
    throw SchemaError("checkpoint manifest: unknown mode '" + mode + "'");

  const int n = parse_int(get("n"));
  if (n < 2 || n % 2) throw SchemaError("checkpoint manifest: bad grid size");
  auto g = SpectralGrid::create(n, parse_double(get("L")));
  const std::size_t N = g->real_size();
  const std::string bytes = read_text(with_suffix(base, ".bin"));
  if (bytes.size() != 8 * N * fields.size())
    throw SchemaError("checkpoint data: expected " + std::to_string(8 * N * fields.size()) + " bytes, found " +
                      std::to_string(bytes.size()));
  std::vector<std::vector<double>> arrays;
  for (const auto& f : fields) {
    const auto off = std::size_t(parse_ll(get("offset " + f)));
    if (off + 8 * N > bytes.size()) throw SchemaError("checkpoint manifest: offset of " + f + " out of range");
    arrays.push_back(get_array(bytes, off, N));
  }
  c.state.rho = ScalarField(g, std::move(arrays[0]));
  c.state.momentum = VectorField(g);
  for (int k = 0; k < 3; ++k) c.state.momentum.comp[k] = std::move(arrays[1 + k]);
  c.state.potential = ScalarField(g, std::move(arrays[4]));
  c.state.time = parse_double(get("time"));
  c.state.potential_consistent = parse_bool(get("potential_consistent"));
  return c;
}

}  // namespace nsp
