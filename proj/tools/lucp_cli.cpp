// lucp command-line front end: extract / reconstruct / invariants / decompose
// / check / gen-pair. Exit codes: 0 equivalent or success, 1 not equivalent,
// 2 inconclusive, 3 input or usage error, 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lucp/json_io.hpp"
#include "lucp/lu_check.hpp"

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("LUCP_LOG");
  if (!env) return LogLevel::Error;
  std::string s(env);
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Error;
}

void log(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) <= static_cast<int>(log_level()))
    std::cerr << "lucp: " << msg << "\n";
}

// Renders v as an exact fraction p/q (q <= 1200) when one is within 1e-12,
// otherwise as a plain number.
std::string render_value(double v) {
  for (int q = 1; q <= 1200; ++q) {
    double p = std::round(v * q);
    if (std::abs(v - p / q) <= 1e-12) {
      if (q == 1) return std::to_string(static_cast<long long>(p));
      std::ostringstream os;
      os << static_cast<long long>(p) << "/" << q;
      return os.str();
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string render_list(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += render_value(xs[i]);
  }
  return out;
}

std::string render_modes(const std::vector<int>& modes) {
  std::string out = "{";
  for (size_t i = 0; i < modes.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(modes[i] + 1);
  }
  return out + "}";
}

void emit(const std::string& path, const lucp::Json& j) {
  if (path.empty())
    std::cout << j.dump(2) << "\n";
  else
    lucp::save_json(path, j);
}

void print_invariants_text(const lucp::InvariantReport& rep, std::ostream& os) {
  os << "dims:        ";
  for (size_t i = 0; i < rep.dims.size(); ++i) os << (i ? "x" : "") << rep.dims[i];
  os << "\ntensor norm: " << render_value(rep.tensor_norm) << "\n";
  os << "mode norms:  " << render_list(rep.mode_norms) << "\n";
  os << "\n  modes      norm            rank  weights\n";
  for (const auto& s : rep.subtensors) {
    char line[160];
    std::snprintf(line, sizeof(line), "  %-10s %-15s %s%-3d %s\n",
                  render_modes(s.modes).c_str(), render_value(s.norm).c_str(),
                  s.rank_exact ? " " : "~", s.rank, render_list(s.weights).c_str());
    os << line;
  }
  if (!rep.gram_traces.empty())
    os << "\ngram traces: " << render_list(rep.gram_traces)
       << "  (full-tensor rank estimate " << rep.full_rank_estimate << ")\n";
}

struct CommonOpts {
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int restarts = 20;
  int max_iters = 500;
  std::string format = "json";
};

lucp::AlsConfig als_config(const CommonOpts& o) {
  lucp::AlsConfig cfg;
  cfg.seed = o.seed;
  cfg.restarts = o.restarts;
  cfg.max_iters = o.max_iters;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--tol", o.tol, "numerical tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--restarts", o.restarts, "ALS restarts");
  cmd->add_option("--max-iters", o.max_iters, "ALS iteration cap");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"json", "text"}));
}

std::vector<int> parse_dims(const std::string& s) {
  std::vector<int> dims;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) dims.push_back(std::stoi(part));
  if (dims.empty()) throw lucp::invalid_input("--dims must list at least one dimension");
  for (int d : dims)
    if (d < 2) throw lucp::invalid_input("--dims entries must be >= 2");
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local-unitary equivalence toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string input, output, path_a, path_b, dims_str, report_path;
  int rank = -1;
  bool orthogonal = false;

  auto* extract = app.add_subcommand("extract", "density JSON -> Bloch tensor JSON");
  extract->add_option("--input", input)->required();
  extract->add_option("--output", output);
  add_common(extract, opts);

  auto* reconstruct = app.add_subcommand("reconstruct", "Bloch tensor JSON -> density JSON");
  reconstruct->add_option("--input", input)->required();
  reconstruct->add_option("--output", output);
  add_common(reconstruct, opts);

  auto* invariants = app.add_subcommand("invariants", "density or tensor JSON -> invariant report");
  invariants->add_option("--input", input)->required();
  invariants->add_option("--output", output);
  add_common(invariants, opts);

  auto* decompose = app.add_subcommand("decompose", "tensor JSON -> CP decomposition JSON");
  decompose->add_option("--input", input)->required();
  decompose->add_option("--output", output);
  decompose->add_option("--rank", rank)->required()->check(CLI::PositiveNumber);
  decompose->add_flag("--orthogonal", orthogonal);
  add_common(decompose, opts);

  auto* check = app.add_subcommand("check", "two density JSONs -> equivalence decision");
  check->add_option("--a", path_a)->required();
  check->add_option("--b", path_b)->required();
  check->add_option("--output", output);
  check->add_option("--report", report_path, "write invariant reports of both states");
  add_common(check, opts);

  auto* gen_pair = app.add_subcommand("gen-pair", "write an LU-equivalent density pair");
  gen_pair->add_option("--dims", dims_str)->required();
  gen_pair->add_option("--a", path_a)->required();
  gen_pair->add_option("--b", path_b)->required();
  add_common(gen_pair, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 3;
  }

  try {
    if (*extract) {
      lucp::DensityMatrix rho = lucp::density_from_json(lucp::load_json(input));
      emit(output, lucp::bloch_to_json(lucp::extract_coefficient_tensor(rho)));
    } else if (*reconstruct) {
      lucp::BlochTensor bt = lucp::bloch_from_json(lucp::load_json(input));
      emit(output, lucp::density_to_json(lucp::reconstruct_density(bt)));
    } else if (*invariants) {
      lucp::Json j = lucp::load_json(input);
      lucp::BlochTensor bt = j.contains("matrix")
                                 ? lucp::extract_coefficient_tensor(lucp::density_from_json(j))
                                 : lucp::bloch_from_json(j);
      lucp::InvariantReport rep = lucp::compute_invariants(bt, als_config(opts));
      if (opts.format == "text") {
        std::ostringstream os;
        print_invariants_text(rep, os);
        if (output.empty()) {
          std::cout << os.str();
        } else {
          std::ofstream f(output);
          f << os.str();
        }
      } else {
        emit(output, lucp::invariants_to_json(rep));
      }
    } else if (*decompose) {
      lucp::DenseTensor t = lucp::tensor_from_json(lucp::load_json(input));
      lucp::AlsConfig cfg = als_config(opts);
      lucp::FitResult fit =
          orthogonal ? lucp::cp_als_orthogonal(t, rank, cfg) : lucp::cp_als(t, rank, cfg);
      std::cerr << "rank " << rank << " fit: loss " << fit.loss << ", "
                << fit.iterations << " iterations, "
                << (fit.converged ? "converged" : "not converged") << "\n";
      emit(output, lucp::cp_to_json(fit.cp));
    } else if (*check) {
      lucp::DensityMatrix rho_a = lucp::density_from_json(lucp::load_json(path_a));
      lucp::DensityMatrix rho_b = lucp::density_from_json(lucp::load_json(path_b));
      lucp::AlsConfig cfg = als_config(opts);
      lucp::Decision d = lucp::check_lu_equivalence(rho_a, rho_b, cfg, opts.tol);
      if (!report_path.empty()) {
        lucp::Json rep;
        rep["a"] = lucp::invariants_to_json(
            lucp::compute_invariants(lucp::extract_coefficient_tensor(rho_a), cfg));
        rep["b"] = lucp::invariants_to_json(
            lucp::compute_invariants(lucp::extract_coefficient_tensor(rho_b), cfg));
        lucp::save_json(report_path, rep);
      }
      if (opts.format == "text") {
        std::string verdict = d.verdict == lucp::Verdict::Equivalent ? "equivalent"
                              : d.verdict == lucp::Verdict::NotEquivalent
                                  ? "not equivalent"
                                  : "inconclusive";
        std::cout << "verdict:  " << verdict << "\n";
        if (!d.reason.empty()) std::cout << "reason:   " << d.reason << "\n";
        if (d.verdict == lucp::Verdict::Equivalent)
          std::cout << "residual: " << d.residual << "\n";
      } else {
        emit(output, lucp::decision_to_json(d));
      }
      switch (d.verdict) {
        case lucp::Verdict::Equivalent: return 0;
        case lucp::Verdict::NotEquivalent: return 1;
        case lucp::Verdict::Inconclusive: return 2;
      }
    } else if (*gen_pair) {
      std::vector<int> dims = parse_dims(dims_str);
      lucp::DensityMatrix rho = lucp::random_density(dims, opts.seed);
      lucp::LocalUnitary u = lucp::random_local_unitary(dims, opts.seed + 1);
      lucp::DensityMatrix tau = lucp::apply_local_unitary(rho, u);
      lucp::save_json(path_a, lucp::density_to_json(rho));
      lucp::save_json(path_b, lucp::density_to_json(tau));
      log(LogLevel::Info, "wrote " + path_a + " and " + path_b);
    }
  } catch (const lucp::invalid_input& e) {
    std::cerr << "lucp: input error: " << e.what() << "\n";
    return 3;
  } catch (const lucp::numerical_error& e) {
    std::cerr << "lucp: numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const lucp::Json::exception& e) {
    std::cerr << "lucp: input error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "lucp: numerical failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
