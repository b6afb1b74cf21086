#include "rbmo_lab/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "rbmo_lab/czo.hpp"
#include "rbmo_lab/error.hpp"
#include "rbmo_lab/geometry.hpp"
#include "rbmo_lab/io.hpp"
#include "rbmo_lab/measure.hpp"
#include "rbmo_lab/rbmo.hpp"
#include "rbmo_lab/verify.hpp"

namespace rbmo_lab::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

struct FamilyOptions {
  int levels = 6;
  std::size_t stride = 0;
};

void add_family_options(CLI::App* cmd, FamilyOptions& opts) {
  cmd->add_option("--levels", opts.levels, "Number of dyadic cube sides")->check(CLI::Range(1, 40));
  cmd->add_option("--stride", opts.stride, "Center stride over atoms (0 = N/16)");
}

Metric parse_metric(const std::string& name) {
  if (name == "max") return Metric::max_coordinate;
  if (name == "euclidean") return Metric::euclidean;
  throw Error(ErrorCode::invalid_spec, "metric must be 'max' or 'euclidean'");
}

/// Refuses to overwrite any input.
void check_outputs(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  auto same = [](const std::string& a, const std::string& b) {
    std::error_code ec;
    if (fs::exists(a, ec) && fs::exists(b, ec)) return fs::equivalent(a, b, ec);
    return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
  };
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].empty()) continue;
    for (const auto& in : inputs) {
      if (same(in, outputs[i])) throw Error(ErrorCode::invalid_spec, "output '" + outputs[i] + "' is also an input");
    }
    for (std::size_t j = i + 1; j < outputs.size(); ++j) {
      if (!outputs[j].empty() && same(outputs[i], outputs[j])) {
        throw Error(ErrorCode::invalid_spec, "output '" + outputs[i] + "' given twice");
      }
    }
  }
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_text_file(path, text);
  }
}

SampledFunction load_checked(const std::string& path, const AtomicMeasure& measure) {
  SampledFunction f = io::load_function(path);
  validate_function(measure, f);
  return f;
}

/// Smallest cube about the bounding-box center that holds every atom.
Cube full_cube(const AtomicMeasure& measure) {
  const std::size_t m = measure.ambient_dim();
  Point lo(m);
  Point hi(m);
  for (std::size_t k = 0; k < m; ++k) {
    lo[k] = hi[k] = measure.point(0)[k];
    for (std::size_t i = 1; i < measure.size(); ++i) {
      lo[k] = std::min(lo[k], measure.point(i)[k]);
      hi[k] = std::max(hi[k], measure.point(i)[k]);
    }
  }
  Cube q{Point(m), 0.0};
  for (std::size_t k = 0; k < m; ++k) {
    q.center[k] = 0.5 * (lo[k] + hi[k]);
    q.side = std::max(q.side, hi[k] - lo[k]);
  }
  if (!(q.side > 0.0)) q.side = 1.0;
  return q;
}

std::vector<std::string> sorted_json_files(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::parse_error, "'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::invalid_spec, "no .json functions in '" + dir + "'");
  return files;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical toolkit for RBMO norms and Calderon-Zygmund operators on atomic measures", "rbmo_lab"};
  app.require_subcommand(1);

  // gen-measure
  std::string gm_spec;
  std::string gm_metric = "max";
  std::string gm_out;
  auto* gen = app.add_subcommand("gen-measure", "Write a generated measure as JSON");
  gen->add_option("--spec", gm_spec, "uniform:lo,hi,count[,embed] | cantor:depth | twoscale:b,c,p,w")->required();
  gen->add_option("--metric", gm_metric, "max or euclidean");
  gen->add_option("--out", gm_out, "Output file (stdout if omitted)");

  // check-kernel
  std::string ck_kernel;
  std::string ck_measure;
  std::size_t ck_samples = 10000;
  std::uint64_t ck_seed = 1;
  int ck_l2_count = 4;
  int ck_l2_iterations = 500;
  std::string ck_out;
  auto* check = app.add_subcommand("check-kernel", "Sample the kernel conditions and L2 operator norms");
  check->add_option("--kernel", ck_kernel, "cauchy_re | cauchy_im | riesz(n)")->required();
  check->add_option("--measure", ck_measure, "Measure JSON")->required();
  check->add_option("--samples", ck_samples, "Samples per condition")->check(CLI::PositiveNumber);
  check->add_option("--seed", ck_seed, "RNG seed");
  check->add_option("--l2-eps", ck_l2_count, "Number of eps values for the L2 norm (0 skips)")->check(CLI::NonNegativeNumber);
  check->add_option("--l2-iterations", ck_l2_iterations, "Power iterations")->check(CLI::PositiveNumber);
  check->add_option("--out", ck_out, "Output file");

  // norm
  std::string nm_measure;
  std::string nm_function;
  std::string nm_tag = "E";
  double nm_rho = 2.0;
  FamilyOptions nm_family;
  std::string nm_out;
  auto* norm = app.add_subcommand("norm", "Estimate one RBMO norm on the standard cube family");
  norm->add_option("--measure", nm_measure, "Measure JSON")->required();
  norm->add_option("--function", nm_function, "Function JSON")->required();
  norm->add_option("--tag", nm_tag, "A, B, C, D or E");
  norm->add_option("--rho", nm_rho, "Dilation for A, B and C");
  add_family_options(norm, nm_family);
  norm->add_option("--out", nm_out, "Output file");

  // jn-profile
  std::string jn_measure;
  std::string jn_function;
  int jn_count = 16;
  double jn_rho = 1.0;
  FamilyOptions jn_family;
  std::string jn_out;
  auto* jn = app.add_subcommand("jn-profile", "Level-set profile on the full cube around its E witness");
  jn->add_option("--measure", jn_measure, "Measure JSON")->required();
  jn->add_option("--function", jn_function, "Function JSON")->required();
  jn->add_option("--lambdas", jn_count, "Number of equally spaced levels")->check(CLI::PositiveNumber);
  jn->add_option("--rho", jn_rho, "Denominator dilation");
  add_family_options(jn, jn_family);
  jn->add_option("--out", jn_out, "Output file");

  // verify-theorem
  std::string vt_kernel;
  std::string vt_measure;
  std::string vt_corpus_dir;
  std::size_t vt_corpus_count = 8;
  std::uint64_t vt_seed = 1;
  int vt_eps_count = 8;
  bool vt_cube_rows = false;
  FamilyOptions vt_family;
  std::string vt_out;
  std::string vt_csv;
  auto* verify = app.add_subcommand("verify-theorem", "Run the T1 and boundedness checks over a corpus and eps grid");
  verify->add_option("--kernel", vt_kernel, "Kernel name")->required();
  verify->add_option("--measure", vt_measure, "Measure JSON")->required();
  verify->add_option("--corpus-dir", vt_corpus_dir, "Directory of function JSON files (sorted by name)");
  verify->add_option("--corpus-count", vt_corpus_count, "Generated corpus size when no directory is given")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", vt_seed, "Seed of the generated corpus");
  verify->add_option("--eps-count", vt_eps_count, "Points of the geometric eps grid")->check(CLI::PositiveNumber);
  verify->add_flag("--cube-rows", vt_cube_rows, "Include the per-cube table");
  add_family_options(verify, vt_family);
  verify->add_option("--out", vt_out, "Report JSON");
  verify->add_option("--csv", vt_csv, "CSV projection of the report");

  // report
  std::vector<std::string> rp_inputs;
  std::string rp_csv;
  auto* report = app.add_subcommand("report", "Convert theorem reports to CSV");
  report->add_option("--input", rp_inputs, "Report JSON files")->required();
  report->add_option("--csv", rp_csv, "Output CSV (stdout if omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "rbmo_lab: InvalidSpec: " << msg << "\n";
    return 2;
  }

  try {
    if (*gen) {
      check_outputs({}, {gm_out});
      const AtomicMeasure measure = build_measure(parse_measure_spec(gm_spec), parse_metric(gm_metric));
      emit(gm_out, io::dump(io::to_json(measure)), out);
    } else if (*check) {
      check_outputs({ck_measure}, {ck_out});
      const AtomicMeasure measure = io::load_measure(ck_measure);
      const Kernel kernel = builtin_kernel(ck_kernel, measure);
      const KernelReport rep = kernel_condition_report(kernel, measure, ck_samples, ck_seed);
      std::map<double, double> l2;
      if (ck_l2_count > 0 && measure.size() > 1) {
        for (double eps : geometric_eps_grid(measure, ck_l2_count)) {
          l2[eps] = l2_opnorm(kernel, measure, eps, ck_l2_iterations);
        }
      }
      Json j = io::to_json(rep, l2);
      j["provenance"] = Json{{"kernel", kernel.name()},
                             {"seed", ck_seed},
                             {"samples", ck_samples},
                             {"atoms", measure.size()}};
      emit(ck_out, io::dump(j), out);
    } else if (*norm) {
      check_outputs({nm_measure, nm_function}, {nm_out});
      const AtomicMeasure measure = io::load_measure(nm_measure);
      const SampledFunction f = load_checked(nm_function, measure);
      const NormKind kind = parse_norm_kind(nm_tag);
      const CubeFamily family = standard_family(measure, nm_family.levels, nm_family.stride);
      NormEstimate est;
      if (kind == NormKind::A || kind == NormKind::E) {
        est = feasibility_norm(measure, f, family, kind, nm_rho);
      } else {
        auto all = direct_norms(measure, f, family, nm_rho);
        est = std::move(all[kind == NormKind::B ? 0 : kind == NormKind::C ? 1 : 2]);
      }
      emit(nm_out, io::dump(io::to_json(est)), out);
    } else if (*jn) {
      check_outputs({jn_measure, jn_function}, {jn_out});
      const AtomicMeasure measure = io::load_measure(jn_measure);
      const SampledFunction f = load_checked(jn_function, measure);
      const Cube q = full_cube(measure);
      CubeFamily base = standard_family(measure, jn_family.levels, jn_family.stride);
      std::vector<Cube> cubes{q};
      for (const auto& c : base.cubes) {
        if (!(c == q)) cubes.push_back(c);
      }
      const CubeFamily family = make_family(measure, std::move(cubes), base.params, base.provenance);
      const NormEstimate est = feasibility_norm(measure, f, family, NormKind::E);
      const double f_q = est.witness[0] ? *est.witness[0] : weighted_median(measure, f);
      double top = 0.0;
      for (std::size_t i : measure.atoms_in(q)) top = std::max(top, std::abs(f[i] - f_q));
      std::vector<double> lambdas;
      const double step = top > 0.0 ? top / jn_count : 1.0;
      for (int k = 1; k <= jn_count; ++k) lambdas.push_back(step * k);
      const JnProfile prof = jn_profile(measure, f, q, f_q, lambdas, jn_rho);
      Json j = io::to_json(prof);
      j["cube"] = Json::array();
      for (double c : q.center) j["cube"].push_back(c);
      j["cube"].push_back(q.side);
      j["f_Q"] = f_q;
      j["norm_E"] = est.value;
      emit(jn_out, io::dump(j), out);
    } else if (*verify) {
      std::vector<std::string> inputs{vt_measure};
      std::vector<std::string> corpus_files;
      if (!vt_corpus_dir.empty()) {
        corpus_files = sorted_json_files(vt_corpus_dir);
        inputs.insert(inputs.end(), corpus_files.begin(), corpus_files.end());
      }
      check_outputs(inputs, {vt_out, vt_csv});
      const AtomicMeasure measure = io::load_measure(vt_measure);
      const Kernel kernel = builtin_kernel(vt_kernel, measure);
      std::vector<SampledFunction> corpus;
      if (corpus_files.empty()) {
        corpus = standard_corpus(measure, vt_corpus_count, vt_seed);
      } else {
        for (const auto& file : corpus_files) corpus.push_back(load_checked(file, measure));
      }
      const CubeFamily family = standard_family(measure, vt_family.levels, vt_family.stride);
      const auto grid = geometric_eps_grid(measure, vt_eps_count);
      const TheoremReport rep = boundedness_report(kernel, measure, corpus, family, grid, vt_cube_rows);
      Json j = io::to_json(rep);
      j["provenance"]["corpus"] = corpus_files.empty() ? Json{{"generated", vt_corpus_count}, {"seed", vt_seed}}
                                                       : Json{{"files", corpus_files}};
      emit(vt_out, io::dump(j), out);
      if (!vt_csv.empty()) emit(vt_csv, io::theorem_csv(j), out);
    } else if (*report) {
      check_outputs(rp_inputs, {rp_csv});
      std::string text;
      for (std::size_t k = 0; k < rp_inputs.size(); ++k) {
        const std::string part = io::theorem_csv(io::read_json_file(rp_inputs[k]));
        if (k == 0) {
          text = part;
        } else {
          // Keep a single header block.
          std::size_t cut = part.find('\n');
          cut = part.find('\n', cut + 1);
          text += part.substr(cut + 1);
        }
      }
      emit(rp_csv, text, out);
    }
  } catch (const Error& e) {
    err << "rbmo_lab: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "rbmo_lab: internal: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace rbmo_lab::cli
