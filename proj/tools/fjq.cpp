#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fjq/error.hpp"
#include "fjq/model.hpp"
#include "fjq/report.hpp"
#include "json.hpp"

namespace {

int exit_code(const fjq::Error& e) {
  switch (e.kind()) {
    case fjq::ErrorKind::NeedsAnsatz: return 2;
    case fjq::ErrorKind::StillSingular:
    case fjq::ErrorKind::IncompleteGauge: return 3;
    case fjq::ErrorKind::Validation:
    case fjq::ErrorKind::Parse: return 4;
    default: return 1;
  }
}

struct RunFlags {
  std::string model, method, variables, gauge;
  bool no_ansatz = false;
};

void add_run_flags(CLI::App* app, RunFlags& f, const std::string& prefix, bool required) {
  auto* m = app->add_option("--" + prefix + "model", f.model, "built-in model name or .fjmodel path");
  if (required) m->required();
  app->add_option("--" + prefix + "method", f.method, "fj or dirac (default: the model's method)")->check(CLI::IsMember({"fj", "dirac"}));
  app->add_option("--" + prefix + "variables", f.variables, "config or phase (checked against the model)")
      ->check(CLI::IsMember({"config", "phase"}));
  app->add_option("--" + prefix + "gauge", f.gauge, "gauge name from the model, or none");
  app->add_flag("--" + prefix + "no-ansatz", f.no_ansatz, "ignore ansatz modes and inverses");
}

fjq::ModelSpec load(const RunFlags& f) {
  fjq::ModelSpec m = fjq::load_model(f.model);
  return f.no_ansatz ? fjq::strip_ansatz(m) : m;
}

fjq::AnalyzeOptions options(const RunFlags& f) {
  fjq::AnalyzeOptions o;
  o.method = f.method;
  o.variables = f.variables;
  if (!f.gauge.empty() && f.gauge != "none") o.gauge = f.gauge;
  return o;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream o(out);
  if (!o) throw fjq::Error(fjq::ErrorKind::Validation, "cannot write " + out);
  o << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Faddeev-Jackiw and Dirac analysis of constrained field theories"};
  app.require_subcommand(1);
  std::string format = "text", out;
  auto common = [&](CLI::App* s) {
    s->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    s->add_option("--out", out, "write the report to a file");
  };

  RunFlags a;
  auto* analyze = app.add_subcommand("analyze", "run an analysis and print the report");
  add_run_flags(analyze, a, "", true);
  common(analyze);

  RunFlags ca, cb;
  std::string map = "none";
  auto* cmp = app.add_subcommand("compare", "compare bracket tables of two runs (or a run and its reference table)");
  add_run_flags(cmp, ca, "", true);
  add_run_flags(cmp, cb, "against-", false);
  cmp->add_option("--map", map, "none, strong-second-class or momentum-map");
  common(cmp);

  RunFlags v;
  auto* verify = app.add_subcommand("verify-inverse", "check the final symplectic matrix against its inverse");
  add_run_flags(verify, v, "", true);
  common(verify);

  auto* list = app.add_subcommand("list-models", "list built-in models");
  common(list);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      fjq::Report r = fjq::analyze(load(a), options(a));
      emit(format == "json" ? fjq::to_json(r) : fjq::to_text(r), out);
      return 0;
    }
    if (*cmp) {
      fjq::ModelSpec ma = load(ca);
      std::optional<fjq::ModelSpec> mb;
      if (!cb.model.empty()) mb = load(cb);
      std::optional<fjq::CompareSide> sb;
      if (mb) sb = fjq::CompareSide{&*mb, options(cb)};
      fjq::Comparison c = fjq::compare({&ma, options(ca)}, sb, map);
      emit(format == "json" ? fjq::to_json(c, map) : fjq::to_text(c, map), out);
      return c.equivalent ? 0 : 1;
    }
    if (*verify) {
      fjq::ModelSpec m = load(v);
      fjq::AnalyzeOptions o = options(v);
      if (!o.method.empty() && o.method != "fj") throw fjq::Error(fjq::ErrorKind::Validation, "verify-inverse applies to fj runs");
      fjq::FJResult res = fjq::run_fj(m.initial, m.fj, o.gauge);
      const fjq::SymplecticSystem& s = res.fixed ? *res.fixed : res.unfixed;
      fjq::KernelMatrix f = fjq::symplectic_matrix(s);
      fjq::KernelMatrix resid = fjq::verify_inverse(f, res.brackets->matrix);
      std::size_t bad = 0;
      for (std::size_t i = 0; i < resid.nrows(); ++i)
        for (std::size_t j = 0; j < resid.ncols(); ++j) bad += !resid.at(i, j).is_zero();
      std::string source = res.brackets->from_ansatz ? "ansatz" : "computed";
      if (format == "json") {
        nlohmann::ordered_json j;
        j["model"] = m.name;
        j["dimension"] = f.nrows();
        j["inverse"] = source;
        j["nonzero_residual_cells"] = bad;
        emit(j.dump(2) + "\n", out);
      } else {
        emit(m.name + ": " + std::to_string(f.nrows()) + "x" + std::to_string(f.ncols()) + " matrix, " + source + " inverse, " +
                 std::to_string(bad) + " nonzero residual cells\n",
             out);
      }
      return bad ? 4 : 0;
    }
    if (*list) {
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      std::string text;
      for (const auto& name : fjq::builtin_model_names()) {
        fjq::ModelSpec m = fjq::load_model(name);
        j.push_back({{"name", m.name}, {"method", m.method}, {"variables", m.variables_kind}, {"status", m.status},
                     {"description", m.description}});
        text += m.name + "  [" + m.method + (m.variables_kind.empty() ? "" : ", " + m.variables_kind) + ", " + m.status + "]  " +
                m.description + "\n";
      }
      emit(format == "json" ? j.dump(2) + "\n" : text, out);
      return 0;
    }
  } catch (const fjq::ValidationError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << d.line << ":" << d.column << ": " << d.message << "\n";
    return 4;
  } catch (const fjq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
