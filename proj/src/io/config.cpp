#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "hrb/io.hpp"

namespace hrb {

using nlohmann::json;

namespace {

json vec_json(const ParameterVector& v) { return json::array({v[0], v[1], v[2], v[3]}); }

ParameterVector vec_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 4)
    throw std::invalid_argument("config: '" + key + "' must be an array of 4 numbers");
  ParameterVector v;
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("config: '" + key + "' must hold numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

// Reads obj[key] into out when present; rejects unknown keys in obj.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw std::invalid_argument("config: '" + where_ + "' must be an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.push_back(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: '" + where_ + "." + key + "' has the wrong type");
    }
  }
  void get(const std::string& key, ParameterVector& out) {
    seen_.push_back(key);
    if (obj_.contains(key)) out = vec_from(obj_.at(key), where_ + "." + key);
  }
  void get_json(const std::string& key, json& out) {
    seen_.push_back(key);
    if (obj_.contains(key)) out = obj_.at(key);
  }
  const json* sub(const std::string& key) {
    seen_.push_back(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }
  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
        throw std::invalid_argument("config: unknown key '" + where_ + "." + k + "'");
  }

 private:
  const json& obj_;
  std::string where_;
  std::vector<std::string> seen_;
};

}  // namespace

json ExperimentConfig::to_json() const {
  json j;
  j["problem"] = {{"length", problem.length},
                  {"final_time", problem.final_time},
                  {"kappa1", problem.kappa1},
                  {"kappa2", problem.kappa2},
                  {"y_init", problem.y_init},
                  {"input", problem.input},
                  {"lower", vec_json(problem.lower)},
                  {"upper", vec_json(problem.upper)}};
  j["discretization"] = {
      {"n_cells", disc.n_cells}, {"order", disc.order}, {"time_nodes", disc.time_nodes}};
  j["newton"] = {{"abs_tol", newton.abs_tol},
                 {"max_iter", newton.max_iter},
                 {"max_halvings", newton.max_halvings},
                 {"armijo", newton.armijo}};
  j["greedy"] = {{"tol", greedy.tol},
                 {"max_basis", greedy.max_basis},
                 {"grid_points", greedy.grid_points},
                 {"enlarged_dim", greedy.enlarged_dim},
                 {"test_count", greedy.test_count}};
  j["optim"] = {{"alpha_j", optim.alpha_j},
                {"lambda", optim.lambda},
                {"mu_ref", vec_json(optim.mu_ref)},
                {"mu0", vec_json(optim.mu0)},
                {"mu_star", vec_json(optim.mu_star)},
                {"noise_variance", optim.noise_variance},
                {"tol", optim.tol},
                {"radius0", optim.radius0},
                {"max_iter", optim.max_iter},
                {"run_reference", optim.run_reference},
                {"initial_model", optim.initial_model}};
  j["output"] = {{"dir", output.dir}, {"svg", output.svg}};
  j["seed"] = seed;
  j["verbose"] = verbose;
  return j;
}

std::string ExperimentConfig::hash() const {
  json full = to_json();
  json j = {{"problem", full["problem"]},
            {"discretization", full["discretization"]},
            {"newton", full["newton"]},
            {"greedy", full["greedy"]}};
  j["greedy"].erase("test_count");
  return sha256_hex(j.dump());
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Reader top(j, "");
  if (const json* p = top.sub("problem")) {
    Reader r(*p, "problem");
    r.get("length", c.problem.length);
    r.get("final_time", c.problem.final_time);
    r.get("kappa1", c.problem.kappa1);
    r.get("kappa2", c.problem.kappa2);
    r.get("y_init", c.problem.y_init);
    r.get_json("input", c.problem.input);
    r.get("lower", c.problem.lower);
    r.get("upper", c.problem.upper);
    r.finish();
  }
  if (const json* p = top.sub("discretization")) {
    Reader r(*p, "discretization");
    r.get("n_cells", c.disc.n_cells);
    r.get("order", c.disc.order);
    r.get("time_nodes", c.disc.time_nodes);
    r.finish();
  }
  if (const json* p = top.sub("newton")) {
    Reader r(*p, "newton");
    r.get("abs_tol", c.newton.abs_tol);
    r.get("max_iter", c.newton.max_iter);
    r.get("max_halvings", c.newton.max_halvings);
    r.get("armijo", c.newton.armijo);
    r.finish();
  }
  if (const json* p = top.sub("greedy")) {
    Reader r(*p, "greedy");
    r.get("tol", c.greedy.tol);
    r.get("max_basis", c.greedy.max_basis);
    r.get("grid_points", c.greedy.grid_points);
    r.get("enlarged_dim", c.greedy.enlarged_dim);
    r.get("test_count", c.greedy.test_count);
    r.finish();
  }
  if (const json* p = top.sub("optim")) {
    Reader r(*p, "optim");
    r.get("alpha_j", c.optim.alpha_j);
    r.get("lambda", c.optim.lambda);
    r.get("mu_ref", c.optim.mu_ref);
    r.get("mu0", c.optim.mu0);
    r.get("mu_star", c.optim.mu_star);
    r.get("noise_variance", c.optim.noise_variance);
    r.get("tol", c.optim.tol);
    r.get("radius0", c.optim.radius0);
    r.get("max_iter", c.optim.max_iter);
    r.get("run_reference", c.optim.run_reference);
    r.get("initial_model", c.optim.initial_model);
    r.finish();
  }
  if (const json* p = top.sub("output")) {
    Reader r(*p, "output");
    r.get("dir", c.output.dir);
    r.get("svg", c.output.svg);
    r.finish();
  }
  top.get("seed", c.seed);
  top.get("verbose", c.verbose);
  top.finish();

  c.newton.validate();
  make_problem(c).validate();
  if (c.disc.n_cells < 2 || (c.disc.order != 1 && c.disc.order != 2) || c.disc.time_nodes < 2)
    throw std::invalid_argument("config: invalid discretization");
  if (!(c.greedy.tol > 0.0) || c.greedy.max_basis < 1 || c.greedy.grid_points < 1 ||
      c.greedy.enlarged_dim < 1 || c.greedy.test_count < 0)
    throw std::invalid_argument("config: invalid greedy block");
  if (!(c.optim.alpha_j > 0.0) || !(c.optim.lambda > 0.0) || !(c.optim.noise_variance >= 0.0) ||
      !(c.optim.tol > 0.0) || !(c.optim.radius0 > 0.0) || c.optim.max_iter < 0)
    throw std::invalid_argument("config: invalid optim block");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

InputSignal make_input(const json& spec) {
  if (!spec.is_object()) throw std::invalid_argument("input: expected an object");
  if (spec.contains("name")) {
    const std::string name = spec.at("name").get<std::string>();
    if (name == "u1") return InputSignal::constant(1.0);
    if (name == "u2") return InputSignal::step(-1.0, 1.0, 0.75);
    if (name == "u3" || name == "sinusoid") return InputSignal::sinusoid(0.5, 10.0, 0.4, 20.0);
    if (name == "step3") return InputSignal::step(-3.0, 3.0, 4.0 / 3.0);
    throw std::invalid_argument("input: unknown name '" + name + "'");
  }
  const std::string type = spec.value("type", "");
  try {
    if (type == "constant") return InputSignal::constant(spec.at("value").get<double>());
    if (type == "step")
      return InputSignal::step(spec.at("before").get<double>(), spec.at("after").get<double>(),
                               spec.at("switch").get<double>());
    if (type == "sinusoid")
      return InputSignal::sinusoid(spec.at("a").get<double>(), spec.at("w1").get<double>(),
                                   spec.at("b").get<double>(), spec.at("w2").get<double>());
    if (type == "tabulated")
      return InputSignal::tabulated(spec.at("times").get<std::vector<double>>(),
                                    spec.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("input: ") + e.what());
  }
  throw std::invalid_argument("input: needs 'name' or a known 'type'");
}

ProblemDefinition make_problem(const ExperimentConfig& cfg) {
  ProblemDefinition p;
  p.length = cfg.problem.length;
  p.final_time = cfg.problem.final_time;
  const double k1 = cfg.problem.kappa1, k2 = cfg.problem.kappa2, y0 = cfg.problem.y_init;
  p.kappa1 = [k1](double) { return k1; };
  p.kappa2 = [k2](double) { return k2; };
  p.y_init = [y0](double) { return y0; };
  p.input = make_input(cfg.problem.input);
  p.box.lower = cfg.problem.lower;
  p.box.upper = cfg.problem.upper;
  return p;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

}  // namespace hrb
