#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nsplab/fluid_model.hpp"
#include "nsplab/rates.hpp"
#include "nsplab/solvers.hpp"

namespace nsp {

struct MetricRow {
  std::string run_id;
  double epsilon = 0.0;
  int path = 0;
  std::string metric;
  double value = 0.0;
};

constexpr const char* kMetricsHeader = "run_id,epsilon,path,metric,value";
constexpr const char* kRatesHeader = "quantity,predicted_exponent,fitted_slope,r_squared,pass";
constexpr const char* kLedgerHeader =
    "step,time,kinetic,internal,electric,dissipation_cum,ito_cum,martingale_cum,violation";

// Shortest round-trip decimal; non-finite values as nan, inf, -inf.
std::string format_double(double x);
double parse_double(const std::string& s);

std::string metrics_csv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> parse_metrics_csv(const std::string& text);

// Only the persisted fields (quantity, predicted exponent, slope, R^2, pass) survive a round trip.
std::string rates_csv(const std::vector<RateReport>& reports);
std::vector<RateReport> parse_rates_csv(const std::string& text);

std::string ledger_csv(const EnergyLedger& ledger);
std::vector<LedgerRow> parse_ledger_csv(const std::string& text);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

// Checkpoint: <base>.bin holds little-endian f64 arrays (rho, m1, m2, m3, V);
// <base>.manifest records format version, grid, params, time, fields and byte offsets.
constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  FluidState state;
  PhysParams params;
};

void write_checkpoint(const std::filesystem::path& base, const FluidState& s, const PhysParams& p);
// Throws SchemaError on version, field list or size mismatch.
Checkpoint read_checkpoint(const std::filesystem::path& base);

}  // namespace nsp
