// rssiloc command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure, 1 anything unexpected.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "commands.hpp"

namespace {

using namespace rssiloc;
using namespace rssiloc::cli;

int exit_code(const Error& e) {
  switch (classify(e.kind())) {
    case ErrorClass::Config: return 2;
    case ErrorClass::Data: return 3;
    case ErrorClass::Numerical: return 4;
  }
  return 1;
}

/// `key=value` lines; keys are long option names without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Config, path + ":" + std::to_string(line_no) + ": expected key=value");
    out.emplace_back(std::string(detail::trim(t.substr(0, eq))), std::string(detail::trim(t.substr(eq + 1))));
  }
  return out;
}

void add_radio(CLI::App* app, RadioOptions& r) {
  app->add_option("--p0", r.p0, "RSSI at the reference distance, dBm")->capture_default_str();
  app->add_option("--d0", r.d0, "reference distance, cm")->capture_default_str();
  app->add_option("--eta", r.eta, "path-loss exponent")->capture_default_str();
}

void add_anchors(CLI::App* app, std::string& inline_text, std::string& file) {
  app->add_option("--anchors", inline_text, "anchor coordinates in cm, \"x,y;x,y;...\"");
  app->add_option("--anchors-file", file, "file with one \"x,y\" anchor per line");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSSI indoor localization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  std::string config, report_path;
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads (results do not depend on it)")->capture_default_str();
  app.add_option("--config", config, "key=value file; explicit flags win");
  app.add_option("--report", report_path, "write the report here instead of stdout");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "synthesize a regression CSV from a path-loss scene");
  add_anchors(s, sim.anchors, sim.anchors_file);
  s->add_option("--positions", sim.positions, "target positions \"x,y;...\" (default: random in the anchor box)");
  s->add_option("--positions-file", sim.positions_file, "file with one \"x,y\" target per line");
  s->add_option("--count", sim.position_count, "number of random targets")->capture_default_str();
  s->add_option("--samples", sim.samples, "rows per target")->capture_default_str();
  s->add_option("--sigma-p", sim.sigma_p, "shadowing std, dB")->capture_default_str();
  s->add_option("--sigma-a", sim.sigma_a, "anchor coordinate noise std, cm")->capture_default_str();
  s->add_option("-o,--output", sim.output, "output CSV");
  add_radio(s, sim.radio);

  FilterOptions flt;
  auto* f = app.add_subcommand("filter", "smooth every RSSI column of a CSV");
  f->add_option("-i,--input", flt.input, "input CSV");
  f->add_option("-o,--output", flt.output, "output CSV");
  f->add_option("--filter", flt.filter, "ma, median, gaussian or kalman");
  f->add_option("--window", flt.window, "moving-average window")->capture_default_str();
  f->add_option("--half-width", flt.half_width, "median half width")->capture_default_str();
  f->add_option("--sigma", flt.sigma, "gaussian kernel std, samples")->capture_default_str();
  f->add_option("--kalman-p0", flt.kalman_p0, "initial error covariance")->capture_default_str();
  f->add_option("--kalman-q", flt.kalman_q, "process noise")->capture_default_str();
  f->add_option("--kalman-r", flt.kalman_r, "measurement noise (default: variance of the first 10 readings)");

  LocateOptions loc;
  auto* l = app.add_subcommand("locate", "estimate positions from RSSI rows with a geometric solver");
  l->add_option("-i,--input", loc.input, "regression CSV");
  l->add_option("-o,--output", loc.output, "predictions CSV");
  add_anchors(l, loc.anchors, loc.anchors_file);
  l->add_option("--solver", loc.solver, "trilateration, lls, wls, wls-bc, hyperbolic, hyperbolic-w")->capture_default_str();
  l->add_option("--sigma-p", loc.sigma_p, "shadowing std used for weighting, dB")->capture_default_str();
  l->add_option("--sigma-a", loc.sigma_a, "anchor coordinate noise std, cm")->capture_default_str();
  l->add_flag("--cross-term", loc.cross_term, "include the anchor-noise cross term in bias compensation");
  add_radio(l, loc.radio);

  FitOptions fit;
  auto* ft = app.add_subcommand("fit", "train a learner on a train/test split and save it");
  ft->add_option("-i,--input", fit.input, "regression CSV, or iBeacon CSV with --zones");
  ft->add_option("-o,--output", fit.output, "model file (JSON)");
  ft->add_option("--predictions", fit.predictions, "test-set predictions CSV");
  ft->add_option("--model", fit.model, "linear, polynomial, tree, random-forest, extra-trees, treeloc, knn, mlp")->capture_default_str();
  ft->add_option("--zones", fit.zones, "location=zone mapping file (classifiers)");
  ft->add_option("--test-size", fit.test_size, "held-out fraction")->capture_default_str();
  ft->add_option("--degree", fit.degree, "polynomial degree")->capture_default_str();
  ft->add_flag("--cross-terms", fit.cross_terms, "polynomial cross terms");
  ft->add_option("--depth", fit.depth, "maximum tree depth");
  ft->add_option("--trees", fit.trees, "trees per forest")->capture_default_str();
  ft->add_option("--min-leaf", fit.min_leaf, "minimum rows per leaf")->capture_default_str();
  ft->add_option("--k", fit.k, "kNN neighbors")->capture_default_str();
  ft->add_option("--epochs", fit.epochs, "MLP epochs")->capture_default_str();
  ft->add_option("--lr", fit.lr, "MLP learning rate")->capture_default_str();
  ft->add_option("--batch-size", fit.batch_size, "MLP batch size")->capture_default_str();
  ft->add_flag("--standardize", fit.standardize, "standardize MLP inputs");
  ft->add_flag("--fixed-paper", fit.fixed_paper, "TreeLoc: use the published combiner coefficients");
  ft->add_flag("--combiner-holdout", fit.combiner_holdout, "TreeLoc: fit the combiner on a held-out 20%");
  ft->add_flag("--shuffle", fit.shuffle, "TreeLoc: seeded random thirds instead of contiguous ones");

  PredictOptions pr;
  auto* p = app.add_subcommand("predict", "apply a saved model to a CSV");
  p->add_option("--model", pr.model, "model file");
  p->add_option("-i,--input", pr.input, "input CSV");
  p->add_option("-o,--output", pr.output, "predictions CSV");

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "score predictions against ground truth");
  e->add_option("--actual", ev.actual, "CSV with X_Actual/Y_Actual (or zone)");
  e->add_option("--predicted", ev.predicted, "CSV with X_Pred/Y_Pred (or zone_pred)");

  TreeLocCliOptions tl;
  auto* t = app.add_subcommand("treeloc", "fit TreeLoc in-sample and report component and ensemble errors");
  t->add_option("-i,--input", tl.input, "regression CSV");
  t->add_option("-o,--output", tl.output, "predictions CSV");
  t->add_option("--model", tl.model, "save the fitted model here");
  t->add_option("--trees", tl.trees, "trees per forest")->capture_default_str();
  t->add_option("--depth", tl.depth, "ETR/DTR maximum depth (default 25)");
  t->add_flag("--fixed-paper", tl.fixed_paper, "use the published combiner coefficients");
  t->add_flag("--combiner-holdout", tl.combiner_holdout, "fit the combiner on a held-out 20%");
  t->add_flag("--shuffle", tl.shuffle, "seeded random thirds instead of contiguous ones");

  try {
    app.parse(argc, argv);
    if (!config.empty()) {
      CLI::App* sub = app.get_subcommands().front();
      std::vector<std::string> args(argv + 1, argv + argc);
      for (const auto& [key, value] : read_config(config)) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt) opt = app.get_option_no_throw("--" + key);
        if (!opt || key == "config") throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
        if (opt->count() > 0) continue;
        if (opt->get_expected_min() == 0) {
          args.push_back("--" + key + "=" + value);
        } else {
          args.push_back("--" + key);
          args.push_back(value);
        }
      }
      std::reverse(args.begin(), args.end());
      app.clear();
      app.parse(args);
    }
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code(err);
  }

  try {
    Report report;
    if (*s) report = cmd_simulate(sim, common);
    else if (*f) report = cmd_filter(flt, common);
    else if (*l) report = cmd_locate(loc, common);
    else if (*ft) report = cmd_fit(fit, common);
    else if (*p) report = cmd_predict(pr, common);
    else if (*e) report = cmd_evaluate(ev, common);
    else report = cmd_treeloc(tl, common);
    if (report_path.empty()) {
      std::cout << report.text();
    } else {
      write_report(report, report_path);
    }
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
