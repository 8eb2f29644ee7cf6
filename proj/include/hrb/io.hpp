#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrb/greedy.hpp"
#include "hrb/optim.hpp"

namespace hrb {

// ---------------------------------------------------------------------------
// Configuration

/// Experiment description; every field has a default so partial files are accepted.
struct ExperimentConfig {
  struct Problem {
    double length = 1.0;
    double final_time = 1.0;
    double kappa1 = 1.0, kappa2 = 1.0;
    double y_init = 5.0;
    nlohmann::json input = {{"name", "u1"}};
    ParameterVector lower = ParameterVector::Constant(1.0);
    ParameterVector upper = ParameterVector::Constant(5.0);
  } problem;
  struct Discretization {
    int n_cells = 200;
    int order = 1;
    int time_nodes = 201;
  } disc;
  NewtonConfig newton;
  struct Greedy {
    double tol = 1e-4;
    int max_basis = 50;
    int grid_points = 5;
    int enlarged_dim = 2;
    int test_count = 100;
  } greedy;
  struct Optim {
    double alpha_j = 1e5;
    double lambda = 1e-7;
    ParameterVector mu_ref = ParameterVector::Constant(3.0);
    ParameterVector mu0 = ParameterVector::Constant(3.0);
    ParameterVector mu_star = ParameterVector(2.0, 3.0, 4.0, 5.0);
    double noise_variance = 1e-3;
    double tol = 1e-5;
    double radius0 = 0.1;
    int max_iter = 30;
    bool run_reference = true;
    std::string initial_model;  ///< container from a greedy run; empty = fresh build
  } optim;
  struct Output {
    std::string dir = "out";
    bool svg = true;
  } output;
  std::uint64_t seed = 1;
  bool verbose = false;

  nlohmann::json to_json() const;
  /// SHA-256 over the blocks that determine a reduced model (problem, discretization,
  /// Newton settings, greedy settings except the test count).
  std::string hash() const;
};

/// Throws std::invalid_argument with the offending key on schema violations.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// {"name": "u1"|"u2"|"u3"|"step3"|"sinusoid"} or
/// {"type": "constant"|"step"|"sinusoid"|"tabulated", ...parameters}.
InputSignal make_input(const nlohmann::json& spec);
ProblemDefinition make_problem(const ExperimentConfig& cfg);

/// SHA-256 of the bytes, lower-case hex.
std::string sha256_hex(const std::string& bytes);

// ---------------------------------------------------------------------------
// Artifact container

class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named float64 arrays plus string metadata, tied to the hash of the producing config.
/// File layout: magic line, 8-byte little-endian manifest length, JSON manifest,
/// column-major little-endian float64 payload, end marker.
struct ArtifactContainer {
  static constexpr int kVersion = 1;

  std::string config_hash;
  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix> arrays;
  std::map<std::string, std::string> tags;  ///< per-array inner-product tag, e.g. "S_y"

  void put(const std::string& name, const Matrix& a, const std::string& tag = "");
  const Matrix& get(const std::string& name) const;

  std::string serialize() const;
  /// Refuses truncated or padded input, wrong magic/version, inconsistent shapes,
  /// payload checksum mismatches and, when given, a different config hash.
  static ArtifactContainer deserialize(const std::string& bytes,
                                       const std::optional<std::string>& expected_hash = {});

  void save(const std::filesystem::path& path) const;
  static ArtifactContainer load(const std::filesystem::path& path,
                                const std::optional<std::string>& expected_hash = {});
};

/// Bases, DEIM and calibration of a greedy run.
ArtifactContainer pack_greedy(const GreedyResult& res, const std::string& config_hash);
/// Rebuilds the reduced model (operators are re-projected) and calibration.
GreedyResult unpack_greedy(const ArtifactContainer& c, const FullOrderModel& fom);

// ---------------------------------------------------------------------------
// CSV and SVG

/// RFC-4180 writer: CRLF records, fields quoted when they contain ',', '"', CR or LF.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  std::string str() const { return out_; }
  void save(const std::filesystem::path& path) const;

  /// Shortest round-trip decimal form with '.' separator.
  static std::string num(double v);
  static std::string num(long v) { return std::to_string(v); }
  static std::string num(int v) { return std::to_string(v); }
  static std::string quote(const std::string& field);

 private:
  std::size_t width_;
  std::string out_;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool log_y = false;
  int width = 640, height = 420;
};

/// Standalone SVG line plot; non-positive values are dropped on a log axis.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotSpec& spec);

// ---------------------------------------------------------------------------
// Experiment commands

/// True and estimated errors at one test parameter.
struct TestSample {
  ParameterVector mu;
  FieldPair error;      ///< E^l
  FieldPair error_big;  ///< E^m
  EstimatorReport report;
  double fe_seconds = 0.0, rb_seconds = 0.0;

  /// E_m^2 <= sigma E_l^2 for the field.
  bool saturated_y(double sigma) const { return error_big.y * error_big.y <= sigma * error.y * error.y; }
  bool saturated_q(double sigma) const { return error_big.q * error_big.q <= sigma * error.q * error.q; }
};

/// \p count parameters drawn uniformly from the box with a seeded mt19937_64.
std::vector<ParameterVector> random_parameters(const ParameterBox& box, int count, std::uint64_t seed);

/// Full-order and reduced solves at each parameter, sequential so timings are not shared.
std::vector<TestSample> test_sweep(const std::vector<ParameterVector>& params, const GreedyResult& res,
                                   const FullOrderModel& fom);

struct GreedyTable {
  GreedyResult result;
  std::vector<TestSample> samples;
  int test_count = 0;
  double avg_fe_seconds = 0.0, avg_rb_seconds = 0.0;
  FieldPair max_error;
  FieldPair max_efficiency, min_efficiency;
  int saturated_count = 0;  ///< test parameters where E_m^2 <= sigma E_l^2 in both fields
};

std::unique_ptr<FullOrderModel> make_fom(const ExperimentConfig& cfg);
GreedyConfig make_greedy_config(const ExperimentConfig& cfg, const ParameterBox& box);
CostConfig make_cost_config(const ExperimentConfig& cfg);

GreedyTable cmd_greedy(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct OptimizeReport {
  std::optional<OptimResult> reference;
  OptimResult tr_rb;
};

OptimizeReport cmd_optimize(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Full-order (and, with optim.initial_model, reduced) solve at one parameter.
void cmd_solve(const ExperimentConfig& cfg, const ParameterVector& mu,
               const std::filesystem::path& out_dir);

}  // namespace hrb
