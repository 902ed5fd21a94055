#include "proxsarah/experiment.hpp"

#include "proxsarah/data.hpp"
#include "proxsarah/errors.hpp"
#include "proxsarah/log.hpp"
#include "proxsarah/presets.hpp"
#include "proxsarah/problems.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace proxsarah {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, std::size_t line) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError(line, key + ": cannot parse '" + value + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ParseError(line, key + ": value must be finite");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value, std::size_t line) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ParseError(line, key + ": expected true or false, got '" + value + "'");
}

SolverSpec parse_solver(const std::string& value, std::size_t line) {
  std::istringstream tokens(value);
  SolverSpec spec;
  spec.line = line;
  std::string token;
  if (!(tokens >> token)) throw ParseError(line, "solver: missing solver name");
  try {
    spec.name = canonical_preset_name(token);
  } catch (const ConfigError& e) {
    throw ParseError(line, std::string("solver: ") + e.what());
  }
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) {
      throw ParseError(line, "solver: expected key=value, got '" + token + "'");
    }
    spec.params.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  std::string raw;
  std::size_t line = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (value.empty()) throw ParseError(line, key + ": missing value");
    if (key != "solver" && !seen.insert(key).second) throw ParseError(line, key + ": given more than once");

    if (key == "solver") {
      cfg.solvers.push_back(parse_solver(value, line));
    } else if (key == "problem") {
      if (value != "nnpca" && value != "binclass") {
        throw ParseError(line, "problem: expected nnpca or binclass, got '" + value + "'");
      }
      cfg.problem = value;
    } else if (key == "dataset") {
      cfg.dataset = value;
    } else if (key == "synthetic_n") {
      cfg.synthetic_n = parse_number<std::size_t>(key, value, line);
    } else if (key == "synthetic_d") {
      cfg.synthetic_d = parse_number<std::size_t>(key, value, line);
    } else if (key == "synthetic_seed") {
      cfg.synthetic_seed = parse_number<std::uint64_t>(key, value, line);
    } else if (key == "separability") {
      cfg.separability = parse_number<double>(key, value, line);
    } else if (key == "dimension") {
      cfg.dimension = parse_number<std::size_t>(key, value, line);
    } else if (key == "loss") {
      try {
        Loss::parse_kind(value);
      } catch (const InvalidArgument& e) {
        throw ParseError(line, std::string("loss: ") + e.what());
      }
      cfg.loss = value;
    } else if (key == "lambda") {
      cfg.lambda = parse_number<double>(key, value, line);
    } else if (key == "omega") {
      cfg.omega = parse_number<double>(key, value, line);
    } else if (key == "test_fraction") {
      cfg.test_fraction = parse_number<double>(key, value, line);
    } else if (key == "normalize") {
      cfg.normalize = parse_bool(key, value, line);
    } else if (key == "epochs") {
      cfg.epochs = parse_number<double>(key, value, line);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value, line);
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "threads") {
      cfg.threads = parse_number<int>(key, value, line);
    } else if (key == "rows_per_epoch") {
      cfg.rows_per_epoch = parse_number<std::size_t>(key, value, line);
    } else if (key == "output_iterate") {
      try {
        cfg.output_iterate = parse_output_rule(value);
      } catch (const ConfigError& e) {
        throw ParseError(line, std::string("output_iterate: ") + e.what());
      }
    } else if (key == "wall_clock") {
      cfg.wall_clock = parse_bool(key, value, line);
    } else if (key == "f_star") {
      cfg.f_star = parse_number<double>(key, value, line);
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }
  if (cfg.solvers.empty()) throw ParseError(line, "solver: at least one solver line is required");
  if (!(cfg.epochs > 0.0)) throw ConfigError("epochs: must be > 0");
  if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
  if (!(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0)) throw ConfigError("test_fraction: must lie in [0, 1)");
  if (cfg.lambda && !(*cfg.lambda >= 0.0)) throw ConfigError("lambda: must be >= 0");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_experiment_config(in, path.parent_path());
}

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& overrides) {
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.epochs) {
    if (!(*overrides.epochs > 0.0)) throw ConfigError("--epochs must be > 0");
    cfg.epochs = *overrides.epochs;
  }
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  if (overrides.threads) {
    if (*overrides.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.threads = *overrides.threads;
  }
}

// ---------------------------------------------------------------------------
// Output writers

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceCsvHeader << "\n";
  char buf[64];
  auto real = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  for (const TraceRow& row : trace.rows) {
    real(row.epoch_fraction);
    out << ',';
    real(row.objective);
    out << ',';
    real(row.rel_residual);
    out << ',';
    real(row.grad_map_norm_sq);
    out << ',';
    if (row.train_acc) real(*row.train_acc);
    out << ',';
    if (row.test_acc) real(*row.test_acc);
    out << ',' << row.wall_ms << "\n";
  }
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double x, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series, bool log_y) {
  constexpr double kWidth = 760, kHeight = 480;
  constexpr double kLeft = 80, kRight = 190, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                        "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#000000", "#aec7e8"};

  auto usable = [&](double y) { return std::isfinite(y) && (!log_y || y > 0.0); };
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const PlotSeries& s : series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!usable(s.y[k]) || !std::isfinite(s.x[k])) continue;
      x_min = std::min(x_min, s.x[k]);
      x_max = std::max(x_max, s.x[k]);
      const double y = log_y ? std::log10(s.y[k]) : s.y[k];
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const bool empty = !std::isfinite(x_min);
  if (empty) {
    x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  }
  if (log_y) {
    y_min = std::floor(y_min);
    y_max = std::ceil(y_max);
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;

  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // y ticks: decades on a log axis, five even steps otherwise
  std::vector<double> y_ticks;
  if (log_y) {
    const int step = std::max(1, static_cast<int>(std::ceil((y_max - y_min) / 10.0)));
    for (double e = y_min; e <= y_max + 1e-9; e += step) y_ticks.push_back(e);
  } else {
    for (int k = 0; k <= 5; ++k) y_ticks.push_back(y_min + (y_max - y_min) * k / 5.0);
  }
  for (double t : y_ticks) {
    const double y = py(t);
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << num(y)
        << "\" stroke=\"#dddddd\"/>\n";
    const std::string label = log_y ? "1e" + num(t, 3) : num(t, 4);
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double t = x_min + (x_max - x_min) * k / 5.0;
    const double x = px(t);
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << num(x) << "\" y2=\""
        << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << kTop + plot_h + 20 << "\" text-anchor=\"middle\">" << num(t, 4)
        << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << kTop + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << (log_y ? " (log scale)" : "") << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& s = series[i];
    const char* color = kColors[i % (sizeof kColors / sizeof kColors[0])];
    std::ostringstream points;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!usable(s.y[k]) || !std::isfinite(s.x[k])) continue;
      points << num(px(s.x[k])) << "," << num(py(log_y ? std::log10(s.y[k]) : s.y[k])) << " ";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"" << points.str()
        << "\"/>\n";
    const double ly = kTop + 12 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 36
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct LoadedProblem {
  std::shared_ptr<const ProblemOracle> oracle;
  Regularizer reg = Regularizer::zero();
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;
  std::optional<Vector> w0;
  std::string source;
  std::size_t dropped_rows = 0;
};

Dataset load_rows(const ExperimentConfig& cfg, std::uint64_t synthetic_seed) {
  if (cfg.dataset == "synthetic") {
    if (cfg.synthetic_n == 0 || cfg.synthetic_d == 0) throw ConfigError("synthetic_n and synthetic_d must be >= 1");
    return cfg.problem == "nnpca" ? synth_nnpca(cfg.synthetic_n, cfg.synthetic_d, synthetic_seed)
                                  : synth_binclass(cfg.synthetic_n, cfg.synthetic_d, synthetic_seed, cfg.separability);
  }
  std::filesystem::path path = cfg.dataset;
  if (path.is_relative() && !cfg.base_dir.empty()) path = cfg.base_dir / path;
  if (!std::filesystem::exists(path)) throw ConfigError("dataset: file not found: " + path.string());
  ParseOptions options;
  options.dimension = cfg.dimension;
  return read_libsvm_file(path, options);
}

LoadedProblem load_problem(const ExperimentConfig& cfg) {
  LoadedProblem p;
  const std::uint64_t synthetic_seed = cfg.synthetic_seed.value_or(cfg.seed);
  Dataset rows = load_rows(cfg, synthetic_seed);
  p.source = cfg.dataset == "synthetic" ? "synthetic" : rows.source();
  if (cfg.problem == "binclass") rows = canonicalize_labels(rows);
  if (cfg.normalize) {
    NormalizeResult nr = normalize_rows(rows);
    p.dropped_rows = nr.dropped_zero_rows;
    if (nr.dropped_zero_rows > 0) log::warn("dropped " + std::to_string(nr.dropped_zero_rows) + " all-zero rows");
    rows = std::move(nr.dataset);
  }
  if (rows.empty()) throw ConfigError("dataset has no usable rows");

  if (cfg.problem == "nnpca") {
    if (!rows.rows_unit_norm(1e-12)) throw ConfigError("nnpca needs unit-norm rows; set normalize = true");
    const std::size_t d = rows.dimension();
    p.train = std::make_shared<const Dataset>(rows);
    p.oracle = std::make_shared<const NnPcaProblem>(rows);
    p.reg = Regularizer::nonneg_ball(1.0);
    // w = 0 is stationary for this objective, so start from the normalized all-ones vector.
    p.w0 = Vector::Ones(static_cast<Eigen::Index>(d)) / std::sqrt(static_cast<double>(d));
    return p;
  }

  Dataset train = rows;
  if (cfg.test_fraction > 0.0) {
    auto [tr, te] = split(rows, cfg.test_fraction, cfg.seed);
    if (tr.empty()) throw ConfigError("test_fraction leaves no training rows");
    train = std::move(tr);
    if (!te.empty()) p.test = std::make_shared<const Dataset>(std::move(te));
  }
  const Loss loss(Loss::parse_kind(cfg.loss), cfg.omega);
  const double lambda = cfg.lambda.value_or(1.0 / static_cast<double>(train.size()));
  p.train = std::make_shared<const Dataset>(train);
  p.oracle = std::make_shared<const BinClassProblem>(std::move(train), loss);
  p.reg = Regularizer::l1(lambda);
  return p;
}

std::string safe_label(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

nlohmann::ordered_json method_json(const Method& method, const RunResult& r, std::size_t n) {
  nlohmann::ordered_json j;
  j["family"] = method_family(method);
  if (const auto* c = std::get_if<ProxSarahConfig>(&method)) {
    j["rule"] = to_string(c->rule);
    j["m"] = r.schedule.m();
    j["b_hat"] = r.b_hat;
    j["b_s"] = r.b_s;
    j["gamma_0"] = r.schedule.gammas.front();
    j["gamma_m"] = r.schedule.gammas.back();
    j["eta_0"] = r.schedule.etas.front();
    j["eta_m"] = r.schedule.etas.back();
    j["sigma_m"] = r.schedule.sigma_m;
    j["gamma_clamped"] = r.schedule.clamped;
  } else if (const auto* c = std::get_if<ProxSvrgConfig>(&method)) {
    j["m"] = c->m;
    j["b_hat"] = c->b_hat;
    j["eta"] = c->eta;
  } else if (const auto* c = std::get_if<ProxSpiderBoostConfig>(&method)) {
    j["m"] = c->m;
    j["b_hat"] = c->b_hat;
    j["b_s"] = c->b_s == 0 ? n : c->b_s;
    j["eta"] = c->eta;
  } else if (const auto* c = std::get_if<ProxSgdConfig>(&method)) {
    j["eta0"] = c->eta0;
    j["eta_tilde"] = c->eta_tilde;
    j["b_hat"] = c->b_hat;
  } else {
    j["eta"] = std::get<ProxGdConfig>(method).eta;
  }
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  const LoadedProblem problem = load_problem(cfg);
  const ProblemOracle& oracle = *problem.oracle;
  const std::size_t n = oracle.mode().n;
  const double L = oracle.lipschitz();
  log::info("problem " + cfg.problem + ": n = " + std::to_string(n) + ", d = " + std::to_string(oracle.dimension()) +
            ", L = " + num(L, 8) + ", psi = " + problem.reg.describe());

  std::vector<Method> methods;
  std::vector<SolverConfig> configs;
  std::vector<std::string> labels;
  std::map<std::string, int> label_uses;
  for (const SolverSpec& spec : cfg.solvers) {
    auto context = [&](const std::string& what) {
      return "line " + std::to_string(spec.line) + ": solver " + spec.name + ": " + what;
    };
    SolverConfig sc;
    try {
      Method method = make_preset(spec.name, n, L);
      sc.output = cfg.output_iterate;
      for (const auto& [key, value] : spec.params) {
        if (key == "output") {
          sc.output = parse_output_rule(value);
        } else {
          apply_override(method, key, value, n, L);
        }
      }
      sc.method = method;
      methods.push_back(std::move(method));
    } catch (const ConfigError& e) {
      throw ConfigError(context(e.what()));
    } catch (const InvalidArgument& e) {
      throw ConfigError(context(e.what()));
    }
    sc.epochs = cfg.epochs;
    sc.seed = cfg.seed;
    sc.w0 = problem.w0;
    sc.reduction.threads = cfg.threads;
    sc.trace.rows_per_epoch = cfg.rows_per_epoch;
    sc.trace.wall_clock = cfg.wall_clock;
    if (cfg.problem == "binclass") {
      auto train = problem.train;
      sc.trace.train_accuracy = [train](const Vector& w) { return accuracy(w, *train); };
      if (problem.test) {
        auto test = problem.test;
        sc.trace.test_accuracy = [test](const Vector& w) { return accuracy(w, *test); };
      }
    }
    configs.push_back(std::move(sc));
    const int uses = ++label_uses[spec.name];
    labels.push_back(safe_label(uses == 1 ? spec.name : spec.name + "-" + std::to_string(uses)));
  }

  ExperimentOutcome outcome;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    log::info("running " + labels[k]);
    SolverOutcome so;
    so.label = labels[k];
    so.family = method_family(methods[k]);
    try {
      so.result = run_solver(oracle, problem.reg, configs[k]);
    } catch (const ConfigError& e) {
      throw ConfigError("solver " + labels[k] + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError("solver " + labels[k] + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("solver " + labels[k] + ": " + e.what());
    }
    outcome.solvers.push_back(std::move(so));
  }

  // F*: the configured value, else the best objective seen in this session.
  double f_star = std::numeric_limits<double>::infinity();
  if (cfg.f_star) {
    f_star = *cfg.f_star;
  } else {
    for (const SolverOutcome& so : outcome.solvers) {
      for (const TraceRow& row : so.result.trace.rows) f_star = std::min(f_star, row.objective);
    }
  }
  if (!std::isfinite(f_star)) throw NumericalError("no finite objective value was recorded");
  outcome.f_star = f_star;
  for (SolverOutcome& so : outcome.solvers) {
    apply_reference(so.result.trace, f_star);
    outcome.absolute_residual = so.result.trace.absolute_residual;
  }

  std::filesystem::create_directories(cfg.output_dir);
  for (SolverOutcome& so : outcome.solvers) {
    so.csv = cfg.output_dir / (so.label + ".csv");
    std::ostringstream csv;
    write_trace_csv(csv, so.result.trace);
    write_file(so.csv, csv.str());
  }

  auto series_of = [&](auto field) {
    std::vector<PlotSeries> all;
    for (const SolverOutcome& so : outcome.solvers) {
      PlotSeries s;
      s.label = so.label;
      for (const TraceRow& row : so.result.trace.rows) {
        const std::optional<double> y = field(row);
        if (!y) continue;
        s.x.push_back(row.epoch_fraction);
        s.y.push_back(*y);
      }
      all.push_back(std::move(s));
    }
    return all;
  };
  const std::string x_label = "epochs (SFO calls / n)";
  const std::string residual_label = outcome.absolute_residual ? "F(w) - F*" : "(F(w) - F*) / |F*|";
  const auto residual_path = cfg.output_dir / "residual.svg";
  write_file(residual_path, render_svg("Objective residual", x_label, residual_label,
                                       series_of([](const TraceRow& r) { return std::optional<double>(r.rel_residual); }),
                                       true));
  outcome.svg_files.push_back(residual_path);
  const auto grad_path = cfg.output_dir / "grad_mapping.svg";
  write_file(grad_path,
             render_svg("Gradient mapping norm", x_label, "||G_0.5(w)||^2",
                        series_of([](const TraceRow& r) { return std::optional<double>(r.grad_map_norm_sq); }), true));
  outcome.svg_files.push_back(grad_path);
  if (cfg.problem == "binclass") {
    const auto acc_path = cfg.output_dir / "accuracy.svg";
    auto acc = series_of([](const TraceRow& r) { return r.train_acc; });
    for (auto& s : acc) s.label += " (train)";
    if (problem.test) {
      auto test = series_of([](const TraceRow& r) { return r.test_acc; });
      for (auto& s : test) s.label += " (test)";
      acc.insert(acc.end(), test.begin(), test.end());
    }
    write_file(acc_path, render_svg("Accuracy", x_label, "accuracy", acc, false));
    outcome.svg_files.push_back(acc_path);
  }

  nlohmann::ordered_json manifest;
  manifest["tool"] = "proxsarah";
  manifest["versions"] = {{"proxsarah", "0.1.0"},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"compiler", __VERSION__}};
  manifest["problem"] = {{"kind", cfg.problem},
                         {"dataset", problem.source},
                         {"n", n},
                         {"d", oracle.dimension()},
                         {"L", L},
                         {"regularizer", problem.reg.describe()},
                         {"dropped_zero_rows", problem.dropped_rows}};
  if (cfg.problem == "binclass") {
    manifest["problem"]["loss"] = cfg.loss;
    manifest["problem"]["omega"] = cfg.omega;
    manifest["problem"]["test_rows"] = problem.test ? problem.test->size() : 0;
  }
  if (cfg.dataset == "synthetic") manifest["problem"]["synthetic_seed"] = cfg.synthetic_seed.value_or(cfg.seed);
  manifest["seed"] = cfg.seed;
  manifest["epochs"] = cfg.epochs;
  manifest["threads"] = cfg.threads;
  manifest["eta_ref"] = kReferenceEta;
  manifest["f_star"] = f_star;
  manifest["f_star_source"] = cfg.f_star ? "config" : "session minimum";
  manifest["residual_mode"] = outcome.absolute_residual ? "absolute" : "relative";
  manifest["solvers"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < outcome.solvers.size(); ++k) {
    const SolverOutcome& so = outcome.solvers[k];
    const RunResult& r = so.result;
    nlohmann::ordered_json j;
    j["label"] = so.label;
    j["csv"] = so.csv.filename().string();
    j["parameters"] = method_json(methods[k], r, n);
    j["output_rule"] = to_string(configs[k].output);
    j["outer_iterations"] = r.outer_iterations;
    j["sfo"] = r.counters.sfo;
    j["prox_calls"] = r.counters.prox_calls;
    j["selected_iterate"] = {{"outer", r.selected_index.outer}, {"inner", r.selected_index.inner}};
    if (!r.trace.rows.empty()) {
      j["final_objective"] = r.trace.rows.back().objective;
      j["final_grad_map_norm_sq"] = r.trace.rows.back().grad_map_norm_sq;
    }
    j["selected_grad_map_norm_sq"] = grad_mapping_norm_sq(oracle, problem.reg, r.selected_w);
    manifest["solvers"].push_back(std::move(j));
  }
  outcome.manifest = cfg.output_dir / "manifest.json";
  write_file(outcome.manifest, manifest.dump(2) + "\n");
  return outcome;
}

}  // namespace proxsarah
