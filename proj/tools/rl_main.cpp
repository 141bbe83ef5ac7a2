#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rl/datasets.hpp"
#include "rl/demos.hpp"
#include "rl/params.hpp"
#include "rl/parser.hpp"
#include "rl/reasoning.hpp"
#include "rl/training.hpp"

namespace fs = std::filesystem;

namespace {

struct KbArgs {
  std::string kb;
  std::string config;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;

  void attach(CLI::App* app) {
    app->add_option("--kb", kb, "theory file (.rl)")->required()->check(CLI::ExistingFile);
    app->add_option("--config", config, "key=value overrides")->check(CLI::ExistingFile);
    app->add_option("--data-dir", data_dir, "directory for data statements (default: the theory's)");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--epochs", epochs, "training epochs");
  }

  rl::Theory load() const {
    rl::BuildOptions b;
    b.data_dir = data_dir;
    if (!config.empty()) b.overrides = rl::read_settings_file(config);
    if (epochs) b.overrides.emplace_back("epochs", std::to_string(*epochs));
    b.seed = seed;
    return rl::load_theory(kb, b);
  }
};

void print_values(const rl::QueryResult& r) {
  if (r.axes.empty()) {
    std::cout << rl::format_number(r.values.item()) << "\n";
    return;
  }
  // One line per cell: indices along each free axis, then the value(s).
  const auto& shape = r.values.shape();
  std::size_t cells = 1;
  for (std::size_t a = 0; a < r.axes.size(); ++a) cells *= shape[a];
  std::size_t width = cells ? r.values.size() / cells : 0;
  for (const auto& a : r.axes) std::cout << a << ",";
  std::cout << "value\n";
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rem = c;
    std::vector<std::size_t> idx(r.axes.size());
    for (std::size_t a = r.axes.size(); a-- > 0;) {
      idx[a] = rem % shape[a];
      rem /= shape[a];
    }
    for (auto i : idx) std::cout << i << ",";
    for (std::size_t k = 0; k < width; ++k) std::cout << (k ? " " : "") << rl::format_number(r.values[c * width + k]);
    std::cout << "\n";
  }
}

void print_truths(const rl::Theory& t, const rl::MetricRecord& last) {
  std::cout << "sat = " << rl::format_number(last.at("sat")) << "\n";
  for (std::size_t i = 0; i < t.axioms.size(); ++i) {
    const std::string key = "truth." + t.axiom_label(i);
    if (auto v = last.get(key)) std::cout << "  " << key << " = " << rl::format_number(*v) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rl: differentiable first-order fuzzy logic"};
  app.require_subcommand(1);

  std::string demo_id, demo_config;
  rl::DemoOptions demo;
  auto* demo_cmd = app.add_subcommand("demo", "run a bundled task");
  demo_cmd->add_option("id", demo_id, "one of: " + [] {
    std::string s;
    for (const auto& d : rl::demo_ids()) s += (s.empty() ? "" : ", ") + d;
    return s;
  }())->required();
  demo_cmd->add_option("--seed", demo.seed, "first seed");
  demo_cmd->add_option("--runs", demo.runs, "number of seeds")->check(CLI::PositiveNumber);
  demo_cmd->add_option("--epochs", demo.epochs, "override the training epochs");
  demo_cmd->add_option("--config", demo_config, "key=value overrides")->check(CLI::ExistingFile);
  demo_cmd->add_option("--out", demo.out_dir, "output directory");
  demo_cmd->add_flag("--self-check", demo.self_check, "fail unless the task thresholds hold");

  KbArgs train_args;
  std::string train_out = "rl_out";
  auto* train_cmd = app.add_subcommand("train", "learn the parameters of a theory");
  train_args.attach(train_cmd);
  train_cmd->add_option("--out", train_out, "output directory");

  KbArgs query_args;
  std::string query_formula, query_params;
  bool query_no_train = false;
  auto* query_cmd = app.add_subcommand("query", "truth of a formula or value of a term");
  query_args.attach(query_cmd);
  query_cmd->add_option("--formula", query_formula, "formula or term")->required();
  query_cmd->add_option("--params", query_params, "params.bin from an earlier train")->check(CLI::ExistingFile);
  query_cmd->add_flag("--no-train", query_no_train, "query the initial grounding");

  KbArgs refute_args;
  std::string refute_formula, refute_out;
  std::optional<double> refute_q;
  bool refute_qal = false;
  auto* refute_cmd = app.add_subcommand("refute", "search for a grounding satisfying the theory but not the formula");
  refute_args.attach(refute_cmd);
  refute_cmd->add_option("--formula", refute_formula, "closed formula")->required();
  refute_cmd->add_option("--q", refute_q, "satisfaction threshold in (0.5, 1)");
  refute_cmd->add_option("--out", refute_out, "write trace and counterexample here");
  refute_cmd->add_flag("--query-after-learning", refute_qal, "also run the restart-based check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo_cmd) {
      if (!demo_config.empty()) demo.overrides = rl::read_settings_file(demo_config);
      return rl::demo_main(demo_id, demo, std::cout);
    }
    if (*train_cmd) {
      rl::Theory t = train_args.load();
      rl::MetricsLog log = rl::learn(t);
      fs::create_directories(train_out);
      log.write_jsonl((fs::path(train_out) / "metrics.jsonl").string());
      log.write_csv((fs::path(train_out) / "metrics.csv").string());
      rl::save_params(t.params, (fs::path(train_out) / "params.bin").string());
      print_truths(t, log.back());
      std::cout << "outputs in " << train_out << "\n";
      return 0;
    }
    if (*query_cmd) {
      rl::Theory t = query_args.load();
      if (!query_params.empty()) {
        rl::load_params(t.params, query_params);
      } else if (!query_no_train) {
        rl::learn(t, rl::LearnOptions{nullptr, false});
      }
      print_values(rl::query(t, query_formula));
      return 0;
    }
    if (*refute_cmd) {
      rl::Theory t = refute_args.load();
      if (refute_q) t.apply_setting("refute.q", rl::format_number(*refute_q));
      auto phi = rl::parse_formula(refute_formula, t.env.signature);
      rl::RefutationResult r = rl::reason_refute(t, *phi, t.refute);
      std::cout << to_string(r.verdict) << "\n";
      std::cout << "sat = " << rl::format_number(r.sat) << "\nphi = " << rl::format_number(r.phi) << "\n";
      for (const auto& [name, v] : r.atoms) std::cout << "  " << name << " = " << rl::format_number(v) << "\n";
      if (!refute_out.empty()) {
        fs::create_directories(refute_out);
        r.trace.write_jsonl((fs::path(refute_out) / "metrics.jsonl").string());
        r.trace.write_csv((fs::path(refute_out) / "metrics.csv").string());
        if (r.counterexample) rl::save_params(*r.counterexample, (fs::path(refute_out) / "params.bin").string());
      }
      if (refute_qal) {
        auto qal = rl::reason_query_after_learning(t, *phi, t.refute.q, t.query_restarts);
        std::cout << "query after learning (" << qal.restarts.size()
                  << " restarts): " << (qal.entailed ? "entailed" : "NOT entailed")
                  << (qal.no_satisfying_grounding ? " (no restart reached q)" : "") << "\n";
        for (std::size_t i = 0; i < qal.restarts.size(); ++i) {
          const auto& o = qal.restarts[i];
          std::cout << "  restart " << i << " seed " << o.seed << ": sat = " << rl::format_number(o.sat)
                    << ", phi = " << rl::format_number(o.phi);
          for (const auto& [name, v] : o.atoms) std::cout << ", " << name << " = " << rl::format_number(v);
          std::cout << "\n";
        }
      }
      return 0;
    }
  } catch (const rl::LogicError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rl::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
