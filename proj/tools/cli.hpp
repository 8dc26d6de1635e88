#pragma once

// Command-line front end. run() is kept free of process-global state so the
// test suite can drive it in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spherelab/spherelab.hpp"
#include "spherelab/testing/oracles.hpp"

namespace spherelab::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kFailure = 1, kArgument = 2, kResource = 3, kAnalysis = 4 };

inline std::vector<std::int64_t> parse_list(const std::string& s, const std::string& what) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParameterError(what + ": '" + tok + "' is not an integer");
    }
  }
  if (out.empty()) throw ParameterError(what + " is empty");
  return out;
}

inline Point parse_point(const std::string& s, int dim, const std::string& what) {
  const auto v = parse_list(s, what);
  if (static_cast<int>(v.size()) != dim)
    throw ParameterError(what + " has " + std::to_string(v.size()) + " coordinates, expected " + std::to_string(dim));
  for (auto c : v)
    if (c < INT32_MIN || c > INT32_MAX) throw ParameterError(what + " coordinate out of range");
  return Point::from(std::span<const std::int64_t>(v));
}

inline GridFunction read_function_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open function file " + path);
  return read_grid_function(is);
}

/// `delta`, `box:L`, `file:PATH` or a bare path.
inline GridFunction load_function(const std::string& spec, int dim) {
  GridFunction f(dim);
  if (spec == "delta") {
    f = make_delta(dim);
  } else if (spec.rfind("box:", 0) == 0) {
    f = make_box_indicator(dim, parse_list(spec.substr(4), "box half-width").at(0));
  } else {
    f = read_function_file(spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec);
  }
  if (f.dim() != dim)
    throw ParameterError("function '" + spec + "' has dimension " + std::to_string(f.dim()) + ", expected " +
                         std::to_string(dim));
  return f;
}

inline std::string function_text(const GridFunction& f) {
  std::ostringstream os;
  write_grid_function(os, f);
  return os.str();
}

inline json exponent_json(const ExponentReport& r) {
  return {{"slope", r.fitted_slope},
          {"expected", r.expected_slope},
          {"residual", r.residual},
          {"sample_range", r.sample_range},
          {"log_x", r.log_x},
          {"log_y", r.log_y}};
}

struct Options {
  // shared
  unsigned threads = 0;
  std::string out;
  std::string csv;
  // geometry
  int dim = 0;
  int degree = 2;
  int linearity = 2;
  std::int64_t lambda = 0;
  std::int64_t lambda_max = 0;
  std::int64_t lambda_min = 1;
  std::string normalization = "exact";
  std::string witness_normalization = "asymptotic";
  std::int64_t work_budget = static_cast<std::int64_t>(kDefaultWorkBudget);
  // inputs
  std::vector<std::string> inputs;
  std::vector<std::string> function_files;
  // count
  std::string verify_report;
  std::int64_t brute_limit = 200;
  // randomized runs
  int random_check = 0;
  int corpus = -1;
  std::uint64_t seed = 20180101;
  // witness family
  int box = 1;
  std::string point;
  std::string direction;
  std::int64_t t_min = 10;
  std::int64_t t_max = 2000;
  int samples = 64;
  std::string r;
  std::string radii;
  int max_exponent = -1;
  std::int64_t samples_per_shell = 400'000;
  std::int64_t point_budget = 1'000'000;
  // region / exponents
  double p = 0, q = 0;
  std::string delta0 = "0,1/4,1/2";
  std::string window;
};

class Runner {
public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"spherelab: discrete multilinear spherical maximal functions"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");
    setup(app);
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return kArgument;
    }
    try {
      resolve_threads_option();
      action_();
      return kOk;
    } catch (const ParameterError& e) {
      err_ << "error: " << e.what() << "\n";
      return kArgument;
    } catch (const RangeError& e) {
      err_ << "error: " << e.what() << "\n";
      return kArgument;
    } catch (const ResourceError& e) {
      err_ << "resource error: " << e.what() << "\n";
      return kResource;
    } catch (const AnalysisError& e) {
      err_ << "analysis error: " << e.what() << "\n";
      return kAnalysis;
    } catch (const std::bad_alloc&) {
      err_ << "resource error: out of memory\n";
      return kResource;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kFailure;
    }
  }

private:
  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  std::string name_;
  std::function<void()> action_;

  void resolve_threads_option() {
    if (o_.threads == 0) {
      if (const char* env = std::getenv("SPHERELAB_THREADS"); env && *env) {
        std::size_t pos = 0;
        long v = 0;
        try {
          v = std::stol(env, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != std::string(env).size() || v < 1)
          throw ParameterError(std::string("SPHERELAB_THREADS must be a positive integer, got '") + env + "'");
      }
    }
    o_.threads = resolve_threads(o_.threads);
  }

  SliceOptions slice_options() const {
    if (o_.work_budget < 1) throw ParameterError("--work-budget must be positive");
    return {static_cast<double>(o_.work_budget), o_.threads};
  }

  json base_config() const {
    return {{"subcommand", name_}, {"threads", o_.threads}};
  }

  void echo(const json& cfg) const { err_ << cfg.dump() << "\n"; }

  /// Writes to --out atomically, or to stdout when no path is given.
  void emit(const std::string& path, const std::string& content) const {
    if (path.empty())
      out_ << content;
    else
      write_file_atomic(path, content);
  }

  std::vector<GridFunction> load_inputs(int dim) const {
    std::vector<GridFunction> fs;
    for (const auto& s : o_.inputs) fs.push_back(load_function(s, dim));
    for (const auto& s : o_.function_files) fs.push_back(load_function("file:" + s, dim));
    return fs;
  }

  json inputs_json() const {
    json j = json::array();
    for (const auto& s : o_.inputs) j.push_back(s);
    for (const auto& s : o_.function_files) j.push_back("file:" + s);
    return j;
  }

  CLI::App* sub(CLI::App& app, const std::string& name, const std::string& desc, void (Runner::*fn)()) {
    auto* s = app.add_subcommand(name, desc);
    s->add_option("--threads", o_.threads, "Worker threads (default: SPHERELAB_THREADS, else all cores)");
    s->callback([this, name, fn] {
      name_ = name;
      action_ = [this, fn] { (this->*fn)(); };
    });
    return s;
  }

  void add_sphere(CLI::App* s, bool linear = true, bool dim_required = true) {
    auto* dim = s->add_option("--dim", o_.dim, "Dimension d");
    if (dim_required) dim->required();
    s->add_option("--degree", o_.degree, "Degree k")->capture_default_str();
    if (linear) s->add_option("--linearity", o_.linearity, "Number of functions l")->capture_default_str();
  }

  void add_inputs(CLI::App* s) {
    s->add_option("--input", o_.inputs, "Input function: delta, box:L, file:PATH (repeatable)");
    s->add_option("--function-file", o_.function_files, "Grid-function file (repeatable)");
    s->add_option("--work-budget", o_.work_budget, "Slice work budget")->capture_default_str();
  }

  void setup(CLI::App& app) {
    auto* s = sub(app, "count", "Representation counts r_{d,k}(0..lambda_max) as CSV", &Runner::cmd_count);
    add_sphere(s, false);
    s->add_option("--lambda-max", o_.lambda_max, "Largest level")->required();
    s->add_option("--out", o_.out, "CSV output path (default stdout)");
    s->add_option("--verify-report", o_.verify_report,
                  "Check the table against brute force and every dimension split; JSON report path");
    s->add_option("--brute-limit", o_.brute_limit, "Largest level checked by brute force")->capture_default_str();

    s = sub(app, "shell", "Lattice points of one level set as CSV", &Runner::cmd_shell);
    add_sphere(s, false);
    s->add_option("--lambda", o_.lambda, "Level")->required();
    s->add_option("--out", o_.out, "CSV output path");

    s = sub(app, "avg", "Multilinear spherical average at one level", &Runner::cmd_avg);
    add_sphere(s, true, false);
    add_inputs(s);
    s->add_option("--lambda", o_.lambda, "Level");
    s->add_option("--normalization", o_.normalization, "exact or asymptotic")->capture_default_str();
    s->add_option("--random-check", o_.random_check,
                  "Compare N random small instances against brute force instead; JSON report");
    s->add_option("--seed", o_.seed, "Seed for --random-check")->capture_default_str();
    s->add_option("--out", o_.out, "Output path");

    s = sub(app, "maxop", "Truncated multilinear spherical maximal function", &Runner::cmd_maxop);
    add_sphere(s);
    add_inputs(s);
    s->add_option("--lambda-max", o_.lambda_max, "Largest level")->required();
    s->add_option("--lambda-min", o_.lambda_min, "Smallest level")->capture_default_str();
    s->add_option("--normalization", o_.normalization, "exact or asymptotic")->capture_default_str();
    s->add_option("--out", o_.out, "Output path");

    s = sub(app, "hlmax", "Discrete Hardy-Littlewood maximal function over k-balls", &Runner::cmd_hlmax);
    add_sphere(s, false);
    add_inputs(s);
    s->add_option("--lambda-max", o_.lambda_max, "Largest radius level")->required();
    s->add_option("--out", o_.out, "Output path");

    s = sub(app, "sphmax", "Linear spherical maximal function", &Runner::cmd_sphmax);
    add_sphere(s, false);
    add_inputs(s);
    s->add_option("--lambda-max", o_.lambda_max, "Largest level")->required();
    s->add_option("--lambda-min", o_.lambda_min, "Smallest level")->capture_default_str();
    s->add_option("--out", o_.out, "Output path");

    s = sub(app, "dominate", "Pointwise domination check T* <= M * S", &Runner::cmd_dominate);
    add_sphere(s, false);
    add_inputs(s);
    s->add_option("--lambda-max", o_.lambda_max, "Largest level")->required();
    s->add_option("--corpus", o_.corpus,
                  "Check every pair from {box, delta, N random nonnegative functions} instead of --input");
    s->add_option("--seed", o_.seed, "Seed for --corpus")->capture_default_str();
    s->add_option("--out", o_.out, "JSON output path");

    s = sub(app, "witness", "Sharpness witness value at one point", &Runner::cmd_witness);
    add_sphere(s);
    s->add_option("--box", o_.box, "Box half-width L")->capture_default_str();
    s->add_option("--point", o_.point, "Point x, comma-separated")->required();
    s->add_option("--normalization", o_.witness_normalization, "exact or asymptotic")->capture_default_str();
    s->add_option("--out", o_.out, "JSON output path");

    s = sub(app, "decay", "Fit the witness decay exponent along a ray", &Runner::cmd_decay);
    add_sphere(s);
    s->add_option("--box", o_.box, "Box half-width L")->capture_default_str();
    s->add_option("--direction", o_.direction, "Ray direction, comma-separated (default e_1)");
    s->add_option("--t-min", o_.t_min, "Smallest ray parameter")->capture_default_str();
    s->add_option("--t-max", o_.t_max, "Largest ray parameter")->capture_default_str();
    s->add_option("--samples", o_.samples, "Log-spaced samples")->capture_default_str();
    s->add_option("--out", o_.out, "JSON output path");
    s->add_option("--csv", o_.csv, "CSV output path (radius,value)");

    s = sub(app, "normscan", "Dyadic partial l^r norms of the witness", &Runner::cmd_normscan);
    add_sphere(s);
    s->add_option("--box", o_.box, "Box half-width L")->capture_default_str();
    s->add_option("--r", o_.r, "Exponent r (decimal or a/b)")->required();
    s->add_option("--radii", o_.radii, "Shell radii, comma-separated");
    s->add_option("--max-exponent", o_.max_exponent, "Use radii 2^0..2^m");
    s->add_option("--seed", o_.seed, "Sampling seed")->capture_default_str();
    s->add_option("--samples-per-shell", o_.samples_per_shell, "Monte Carlo samples per shell")->capture_default_str();
    s->add_option("--point-budget", o_.point_budget, "Enumerate shells exactly up to this many cube points")
        ->capture_default_str();
    s->add_option("--out", o_.out, "JSON output path");
    s->add_option("--csv", o_.csv, "CSV output path (radius,partial_norm,shell_sum)");

    s = sub(app, "region", "Classify T*: l^p x l^q -> l^r", &Runner::cmd_region);
    s->add_option("--p", o_.p, "Exponent p")->required();
    s->add_option("--q", o_.q, "Exponent q")->required();
    s->add_option("--r", o_.r, "Exponent r (decimal or a/b)")->required();
    s->add_option("--dim", o_.dim, "Dimension d")->required();
    s->add_option("--degree", o_.degree, "Degree k")->capture_default_str();
    s->add_option("--linearity", o_.linearity, "Number of functions l")->capture_default_str();
    s->add_option("--out", o_.out, "JSON output path");

    s = sub(app, "exponents", "Critical exponent and r0/p0 bounds", &Runner::cmd_exponents);
    add_sphere(s);
    s->add_option("--delta0", o_.delta0, "delta0 values, comma-separated (decimal or a/b)")->capture_default_str();
    s->add_option("--out", o_.out, "JSON output path");

    s = sub(app, "asymfit", "Dyadic log-log fit of the representation counts", &Runner::cmd_asymfit);
    add_sphere(s, false);
    s->add_option("--lambda-max", o_.lambda_max, "Largest level")->required();
    s->add_option("--window", o_.window, "Fit window lo,hi (default lambda_max/128,lambda_max)");
    s->add_option("--out", o_.out, "JSON output path");
    s->add_option("--csv", o_.csv, "CSV output path (log_lambda,log_count)");
  }

  // --- subcommands -------------------------------------------------------

  void cmd_count() {
    const SphereSpec spec{o_.dim, o_.degree};
    spec.validate();
    if (o_.lambda_max < 0) throw ParameterError("--lambda-max must be >= 0");
    json cfg = base_config();
    cfg.update({{"dim", o_.dim}, {"degree", o_.degree}, {"lambda_max", o_.lambda_max}, {"out", o_.out},
                {"verify_report", o_.verify_report}, {"brute_limit", o_.brute_limit}});
    echo(cfg);
    const auto t = rep_counts(spec, o_.lambda_max, o_.threads);
    std::ostringstream os;
    write_counts_csv(os, t);
    emit(o_.out, os.str());
    if (!o_.verify_report.empty()) write_file_atomic(o_.verify_report, verify_counts(t).dump(2) + "\n");
  }

  json verify_counts(const RepCountTable& t) const {
    const auto& spec = t.spec;
    json rep{{"dim", spec.dim}, {"degree", spec.degree}, {"lambda_max", t.lambda_max}};
    std::size_t mismatches = 0;
    if (spec.dim <= 3 && o_.brute_limit >= 0) {
      const std::int64_t top = std::min(t.lambda_max, o_.brute_limit);
      const auto brute = oracle::brute_counts(spec.dim, spec.degree, top);
      std::size_t bad = 0;
      for (std::int64_t mu = 0; mu <= top; ++mu)
        if (brute[static_cast<std::size_t>(mu)] != t.counts[static_cast<std::size_t>(mu)]) ++bad;
      rep["brute_force"] = {{"checked_up_to", top}, {"mismatches", bad}};
      mismatches += bad;
    }
    json splits = json::array();
    const std::size_t len = t.counts.size();
    for (int a = 1; 2 * a <= spec.dim; ++a) {
      const auto ta = rep_counts({a, spec.degree}, t.lambda_max, o_.threads);
      const auto tb = rep_counts({spec.dim - a, spec.degree}, t.lambda_max, o_.threads);
      std::vector<oracle::cpp_int> va(ta.counts.begin(), ta.counts.end()), vb(tb.counts.begin(), tb.counts.end());
      const auto conv = oracle::schoolbook_fast(va, vb, len);
      std::size_t bad = 0;
      for (std::size_t i = 0; i < len; ++i)
        if (conv[i] != t.counts[i]) ++bad;
      splits.push_back({{"split", {a, spec.dim - a}}, {"mismatches", bad}});
      mismatches += bad;
    }
    rep["splits"] = splits;
    rep["mismatches"] = mismatches;
    return rep;
  }

  void cmd_shell() {
    const SphereSpec spec{o_.dim, o_.degree};
    json cfg = base_config();
    cfg.update({{"dim", o_.dim}, {"degree", o_.degree}, {"lambda", o_.lambda}, {"out", o_.out}});
    echo(cfg);
    std::ostringstream os;
    write_shell_csv(os, enumerate_shell(spec, o_.lambda));
    emit(o_.out, os.str());
  }

  OperatorConfig operator_config(std::int64_t lambda_max, std::int64_t lambda_min) const {
    OperatorConfig cfg{{o_.dim, o_.degree}, o_.linearity, lambda_max, parse_normalization(o_.normalization),
                       lambda_min, slice_options()};
    cfg.validate();
    return cfg;
  }

  void cmd_avg() {
    if (o_.random_check > 0) return avg_random_check();
    if (o_.dim == 0) throw ParameterError("--dim is required (unless --random-check is given)");
    const auto cfg = operator_config(o_.lambda, 1);
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"linearity", o_.linearity}, {"lambda", o_.lambda},
               {"normalization", o_.normalization}, {"work_budget", o_.work_budget}, {"inputs", inputs_json()},
               {"out", o_.out}});
    echo(jc);
    const auto res = multilinear_average(load_inputs(o_.dim), o_.lambda, cfg);
    if (res.empty_sphere) err_ << "note: level " << o_.lambda << " has no lattice points; average is zero\n";
    emit(o_.out, function_text(res.value));
  }

  void avg_random_check() {
    json jc = base_config();
    jc.update({{"random_check", o_.random_check}, {"seed", o_.seed}, {"out", o_.out}});
    echo(jc);
    std::mt19937_64 rng(o_.seed);
    std::uniform_int_distribution<int> dim_d(1, 2), lin_d(1, 3), deg_d(2, 3), lam_d(1, 60), norm_d(0, 1);
    double worst = 0.0;
    json worst_case = nullptr;
    std::size_t points = 0, empty = 0;
    for (int n = 0; n < o_.random_check; ++n) {
      const int d = dim_d(rng), l = lin_d(rng), k = deg_d(rng);
      const std::int64_t lambda = lam_d(rng);
      const auto norm = norm_d(rng) ? Normalization::asymptotic : Normalization::exact;
      std::vector<GridFunction> fs;
      for (int j = 0; j < l; ++j) fs.push_back(random_sparse_function({d, 4, 3, false}, rng));
      const OperatorConfig cfg{{d, k}, l, lambda, norm, 1, slice_options()};
      const auto res = multilinear_average(fs, lambda, cfg);
      const auto brute = oracle::brute_multilinear_map(fs, k, lambda);
      const double shell_size = static_cast<double>(oracle::brute_shell(l * d, k, lambda).size());
      double divisor = norm == Normalization::exact ? shell_size : std::pow(double(lambda), double(l * d) / k - 1.0);
      double err = 0.0;
      if (divisor == 0.0) {
        ++empty;
        if (!res.empty_sphere || res.value.size() != 0) err = INFINITY;
      } else {
        for (const auto& [x, bv] : brute) {
          const double ref = bv.sum / divisor, scale = bv.abs_sum / divisor;
          err = std::max(err, std::fabs(res.value.at(x) - ref) / scale);
          ++points;
        }
        for (const auto& [x, v] : res.value.entries())
          if (!brute.contains(x)) err = INFINITY;
      }
      if (err > worst || worst_case.is_null()) {
        worst = std::max(worst, err);
        worst_case = {{"instance", n}, {"dim", d}, {"degree", k}, {"linearity", l}, {"lambda", lambda},
                      {"normalization", to_string(norm)}};
      }
    }
    json rep{{"instances", o_.random_check}, {"seed", o_.seed},         {"points_compared", points},
             {"empty_spheres", empty},       {"max_relative_error", worst}, {"worst_instance", worst_case}};
    emit(o_.out, rep.dump(2) + "\n");
  }

  void cmd_maxop() {
    const auto cfg = operator_config(o_.lambda_max, o_.lambda_min);
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"linearity", o_.linearity}, {"lambda_min", o_.lambda_min},
               {"lambda_max", o_.lambda_max}, {"normalization", o_.normalization}, {"work_budget", o_.work_budget},
               {"inputs", inputs_json()}, {"out", o_.out}});
    echo(jc);
    emit(o_.out, function_text(multilinear_maximal(load_inputs(o_.dim), cfg)));
  }

  GridFunction single_input() const {
    auto fs = load_inputs(o_.dim);
    if (fs.size() != 1) throw ParameterError("expected exactly one input function, got " + std::to_string(fs.size()));
    return fs.front();
  }

  void cmd_hlmax() {
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"lambda_max", o_.lambda_max}, {"work_budget", o_.work_budget},
               {"inputs", inputs_json()}, {"out", o_.out}});
    echo(jc);
    emit(o_.out, function_text(hl_maximal(single_input(), {o_.dim, o_.degree}, o_.lambda_max, slice_options())));
  }

  void cmd_sphmax() {
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"lambda_min", o_.lambda_min}, {"lambda_max", o_.lambda_max},
               {"work_budget", o_.work_budget}, {"inputs", inputs_json()}, {"out", o_.out}});
    echo(jc);
    emit(o_.out, function_text(linear_spherical_maximal(single_input(), {o_.dim, o_.degree}, o_.lambda_max,
                                                        o_.lambda_min, slice_options())));
  }

  static json domination_json(const DominationReport& r) {
    std::vector<std::int32_t> pt;
    for (int i = 0; i < r.argmax_point.dim(); ++i) pt.push_back(r.argmax_point[i]);
    return {{"max_violation", r.max_violation},
            {"argmax_point", pt},
            {"lambda_max", r.lambda_max},
            {"points_checked", r.points_checked},
            {"arrangements_checked", r.arrangements_checked}};
  }

  void cmd_dominate() {
    const SphereSpec spec{o_.dim, o_.degree};
    spec.validate();
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"lambda_max", o_.lambda_max},
               {"work_budget", o_.work_budget}});
    if (o_.corpus >= 0)
      jc.update({{"corpus", o_.corpus}, {"seed", o_.seed}});
    else
      jc["inputs"] = inputs_json();
    jc["out"] = o_.out;
    echo(jc);
    const auto opt = slice_options();
    if (o_.corpus < 0) {
      emit(o_.out, domination_json(domination_check(load_inputs(o_.dim), spec, o_.lambda_max, opt)).dump(2) + "\n");
      return;
    }
    if (!o_.inputs.empty() || !o_.function_files.empty())
      throw ParameterError("--corpus and explicit inputs are mutually exclusive");
    const auto fs = domination_corpus(o_.dim, o_.corpus, o_.seed);
    DominationChecker checker(spec, o_.lambda_max, opt);
    DominationReport total;
    total.lambda_max = o_.lambda_max;
    total.argmax_point = Point::zero(o_.dim);
    total.max_violation = -INFINITY;
    json pairs = json::array(), worst_pair;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      for (std::size_t j = i; j < fs.size(); ++j) {
        const auto r = checker.check({fs[i], fs[j]});
        pairs.push_back({{"pair", {i, j}}, {"max_violation", r.max_violation}, {"points_checked", r.points_checked}});
        total.points_checked += r.points_checked;
        total.arrangements_checked += r.arrangements_checked;
        if (r.max_violation > total.max_violation) {
          total.max_violation = r.max_violation;
          total.argmax_point = r.argmax_point;
          worst_pair = {i, j};
        }
      }
    }
    json rep = domination_json(total);
    rep["functions"] = fs.size();
    rep["pairs_checked"] = pairs.size();
    rep["worst_pair"] = worst_pair;
    rep["pairs"] = pairs;
    emit(o_.out, rep.dump(2) + "\n");
  }

  WitnessSpec witness_spec() const {
    const WitnessSpec w{o_.dim, o_.degree, o_.linearity, o_.box};
    w.validate();
    return w;
  }

  void cmd_witness() {
    const auto w = witness_spec();
    const auto norm = parse_normalization(o_.witness_normalization);
    const Point x = parse_point(o_.point, o_.dim, "--point");
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"linearity", o_.linearity}, {"box", o_.box},
               {"point", o_.point}, {"normalization", to_string(norm)}, {"out", o_.out}});
    echo(jc);
    const double v = witness_value(x, w, norm);
    out_ << format_double(v) << "\n";
    if (!o_.out.empty()) write_file_atomic(o_.out, json{{"point", o_.point}, {"value", v}}.dump(2) + "\n");
  }

  void cmd_decay() {
    const auto w = witness_spec();
    const Point dir = o_.direction.empty() ? Point::unit(o_.dim, 0) : parse_point(o_.direction, o_.dim, "--direction");
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"linearity", o_.linearity}, {"box", o_.box},
               {"direction", dir.to_string(',')}, {"t_min", o_.t_min}, {"t_max", o_.t_max}, {"samples", o_.samples},
               {"out", o_.out}, {"csv", o_.csv}});
    echo(jc);
    const auto res = decay_fit(w, dir, o_.t_min, o_.t_max, o_.samples, o_.threads);
    json rep = exponent_json(res.report);
    json samples = json::array();
    std::ostringstream csv;
    csv << "radius,value\n";
    for (const auto& s : res.samples) {
      samples.push_back({{"t", s.t}, {"radius", s.radius}, {"value", s.value}});
      csv << format_double(s.radius) << ',' << format_double(s.value) << '\n';
    }
    rep["samples"] = samples;
    emit(o_.out, rep.dump(2) + "\n");
    if (!o_.csv.empty()) write_file_atomic(o_.csv, csv.str());
  }

  void cmd_normscan() {
    const auto w = witness_spec();
    const double r = to_double(parse_rational(o_.r));
    std::vector<std::int64_t> radii;
    if (!o_.radii.empty() && o_.max_exponent >= 0) throw ParameterError("give either --radii or --max-exponent");
    if (!o_.radii.empty()) {
      radii = parse_list(o_.radii, "--radii");
    } else if (o_.max_exponent >= 0) {
      if (o_.max_exponent > 30) throw ParameterError("--max-exponent must be <= 30");
      for (int e = 0; e <= o_.max_exponent; ++e) radii.push_back(std::int64_t{1} << e);
    } else {
      throw ParameterError("one of --radii or --max-exponent is required");
    }
    ScanOptions opt{o_.point_budget, o_.samples_per_shell, o_.seed, o_.threads};
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"linearity", o_.linearity}, {"box", o_.box}, {"r", o_.r},
               {"radii", radii}, {"seed", o_.seed}, {"samples_per_shell", o_.samples_per_shell},
               {"point_budget", o_.point_budget}, {"out", o_.out}, {"csv", o_.csv}});
    echo(jc);
    const auto s = partial_norm_scan(w, r, radii, opt);
    std::vector<bool> sampled(s.sampled.begin(), s.sampled.end());
    json rep{{"slope", s.fit.fitted_slope},
             {"expected", s.fit.expected_slope},
             {"residual", s.fit.residual},
             {"shell_sums", s.shell_sums},
             {"ratios", s.ratios},
             {"seed", s.seed},
             {"r", s.r},
             {"radii", s.radii},
             {"sampled", sampled},
             {"partial_norms", s.partial_norms},
             {"predicted_ratios", s.predicted_ratios},
             {"sample_range", s.fit.sample_range}};
    emit(o_.out, rep.dump(2) + "\n");
    if (!o_.csv.empty()) {
      std::ostringstream csv;
      csv << "radius,partial_norm,shell_sum\n";
      for (std::size_t i = 0; i < s.radii.size(); ++i)
        csv << s.radii[i] << ',' << format_double(s.partial_norms[i]) << ',' << format_double(s.shell_sums[i]) << '\n';
      write_file_atomic(o_.csv, csv.str());
    }
  }

  void cmd_region() {
    const double r = to_double(parse_rational(o_.r));
    json jc = base_config();
    jc.update({{"p", o_.p}, {"q", o_.q}, {"r", o_.r}, {"dim", o_.dim}, {"degree", o_.degree},
               {"linearity", o_.linearity}, {"out", o_.out}});
    echo(jc);
    const auto v = region_classify(o_.p, o_.q, r, o_.dim, o_.degree, o_.linearity);
    out_ << to_string(v.verdict) << "\n";
    if (!o_.out.empty())
      write_file_atomic(o_.out, json{{"p", o_.p}, {"q", o_.q}, {"r", r}, {"dim", o_.dim}, {"degree", o_.degree},
                                     {"verdict", to_string(v.verdict)}, {"reason", v.reason}}
                                        .dump(2) + "\n");
  }

  void cmd_exponents() {
    SphereSpec{o_.dim, o_.degree}.validate();
    if (o_.linearity < 1) throw ParameterError("--linearity must be >= 1");
    std::vector<Rational> ds;
    {
      std::stringstream ss(o_.delta0);
      std::string tok;
      while (std::getline(ss, tok, ',')) ds.push_back(parse_rational(tok));
    }
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"linearity", o_.linearity}, {"delta0", o_.delta0},
               {"out", o_.out}});
    echo(jc);
    const Rational crit = critical_r(o_.dim, o_.degree, o_.linearity);
    json bounds = json::array();
    for (const auto& d0 : ds) {
      const auto r0 = r0_bound(d0, o_.linearity);
      const auto p0 = p0_bound(d0, o_.dim, o_.degree);
      bounds.push_back({{"delta0", to_string(d0)}, {"r0", to_string(r0)}, {"r0_value", to_double(r0)},
                        {"p0", to_string(p0)}, {"p0_value", to_double(p0)}});
    }
    json rep{{"dim", o_.dim},
             {"degree", o_.degree},
             {"linearity", o_.linearity},
             {"critical_r", to_string(crit)},
             {"critical_r_value", to_double(crit)},
             {"bounds", bounds}};
    emit(o_.out, rep.dump(2) + "\n");
  }

  void cmd_asymfit() {
    const SphereSpec spec{o_.dim, o_.degree};
    spec.validate();
    if (o_.lambda_max < 2) throw ParameterError("--lambda-max must be >= 2");
    std::int64_t lo = std::max<std::int64_t>(1, o_.lambda_max / 128), hi = o_.lambda_max;
    if (!o_.window.empty()) {
      const auto w = parse_list(o_.window, "--window");
      if (w.size() != 2) throw ParameterError("--window needs exactly two values lo,hi");
      lo = w[0];
      hi = w[1];
    }
    json jc = base_config();
    jc.update({{"dim", o_.dim}, {"degree", o_.degree}, {"lambda_max", o_.lambda_max}, {"window", {lo, hi}},
               {"out", o_.out}, {"csv", o_.csv}});
    echo(jc);
    if (const auto warn = asymptotic_warning(spec); !warn.empty()) err_ << "warning: " << warn << "\n";
    const auto rep = growth_exponent_fit(rep_counts(spec, o_.lambda_max, o_.threads), lo, hi);
    json j = exponent_json(rep);
    j["warning"] = asymptotic_warning(spec);
    emit(o_.out, j.dump(2) + "\n");
    if (!o_.csv.empty()) {
      std::ostringstream csv;
      csv << "log_lambda,log_count\n";
      for (std::size_t i = 0; i < rep.log_x.size(); ++i)
        csv << format_double(rep.log_x[i]) << ',' << format_double(rep.log_y[i]) << '\n';
      write_file_atomic(o_.csv, csv.str());
    }
  }
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(argc, argv);
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"spherelab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace spherelab::cli
