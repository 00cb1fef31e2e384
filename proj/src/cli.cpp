#include "estent/cli.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "estent/bounds.hpp"
#include "estent/coding.hpp"
#include "estent/entropy.hpp"

namespace estent {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << "config: " << path << ":" << line << ":" << column << ": "
        << e.what();
    throw config_error(msg.str());
  }
}

const json& require_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw config_error("config: missing required field '" + where + "." + key + "'");
  return j.at(key);
}

double require_number(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number())
    throw config_error("config: '" + where + "." + key + "' must be a number");
  return v.get<double>();
}

int require_int(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number_integer())
    throw config_error("config: '" + where + "." + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    throw config_error("config: '" + where + "' must be a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number())
      throw config_error("config: '" + where + "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> int_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    throw config_error("config: '" + where + "' must be a non-empty array of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number_integer())
      throw config_error("config: '" + where + "' must contain only integers");
    out.push_back(e.get<int>());
  }
  return out;
}

// %.17g: shortest text that round-trips a double under the classic locale
std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// shortest decimal repr (for labels and embedding numbers in names)
std::string num_label(double v) { return json(v).dump(); }

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("output: cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw config_error("output: failed writing '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
  fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw config_error("output: cannot create directory '" + config.output_dir + "'");
  return dir;
}

std::vector<std::complex<double>> spectrum_from_json(const json& v,
                                                     const std::string& where) {
  if (!v.is_array() || v.empty())
    throw config_error("config: '" + where +
                       "' must be a non-empty array (numbers or [re, im] pairs)");
  std::vector<std::complex<double>> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (e.is_number()) {
      out.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      out.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw config_error("config: '" + where +
                         "' entries must be numbers or [re, im] pairs");
    }
  }
  return out;
}

json complex_list_json(const std::vector<std::complex<double>>& values) {
  json out = json::array();
  for (const auto& z : values) out.push_back({z.real(), z.imag()});
  return out;
}

std::string channel_label(const json& spec, const Channel& channel,
                          std::size_t index) {
  if (spec.is_object() && spec.contains("label"))
    return spec.at("label").get<std::string>();
  switch (channel.kind) {
    case ChannelKind::noiseless:
      return "noiseless_" + std::to_string(channel.input_size);
    case ChannelKind::bsc:
      return "bsc_p" + num_label(channel.p);
    case ChannelKind::erasure:
      return "erasure_p" + num_label(channel.p) + "_m" +
             std::to_string(channel.input_size);
    case ChannelKind::general:
      return "general_" + std::to_string(index);
  }
  return "channel_" + std::to_string(index);
}

SpanningSchemeOptions spanning_options_from_json(const json& spec) {
  SpanningSchemeOptions options;
  options.sample_size = spec.value("sample_size", options.sample_size);
  options.code_error_trials = spec.value("code_error_trials", options.code_error_trials);
  options.uses_per_step = spec.value("uses_per_step", options.uses_per_step);
  options.rate_fraction = spec.value("rate_fraction", options.rate_fraction);
  return options;
}

json scheme_meta_json(const Scheme& scheme) {
  json meta{{"name", scheme.name()},
            {"lock_on", scheme.lock_on()},
            {"min_horizon", scheme.min_horizon()}};
  if (const auto* runner = dynamic_cast<const SpanningRunner*>(&scheme)) {
    const SpanningScheme& s = runner->scheme();
    meta["epsilon"] = s.epsilon;
    meta["delta"] = s.delta;
    meta["start_block"] = s.start_block;
    meta["max_block"] = s.max_block;
    meta["max_horizon"] = s.max_horizon();
    meta["uses_per_step"] = s.uses_per_step;
    meta["capacity_warning"] = s.capacity_warning;
  } else if (const auto* runner = dynamic_cast<const ZoomRunner*>(&scheme)) {
    const ZoomScheme& s = runner->scheme();
    meta["eigenvalues"] = s.eigenvalues;
    meta["rates"] = s.rates;
    meta["erasure_p"] = s.erasure_p;
    meta["stable"] = s.stable;
    meta["kappa_min"] = s.kappa_min;
    meta["r_star"] = s.r_star;
  }
  return meta;
}

void write_traces_csv(const fs::path& path, const SystemModel& system,
                      const Channel& channel, const Scheme& scheme, int trials,
                      int horizon, std::uint64_t master_seed) {
  std::ostringstream out;
  bool header_done = false;
  for (int i = 0; i < trials; ++i) {
    TrajectoryBlock tb =
        scheme.run(system, channel, horizon, derive_seed(master_seed, i));
    if (!header_done) {
      out << "trial,t";
      for (int d = 0; d < tb.dim; ++d) out << ",state_" << d;
      for (int d = 0; d < tb.dim; ++d) out << ",estimate_" << d;
      for (const auto& [name, series] : tb.aux) out << "," << name;
      out << "\n";
      header_done = true;
    }
    for (int t = 0; t < tb.horizon; ++t) {
      out << i << "," << t;
      for (int d = 0; d < tb.dim; ++d) out << "," << g17(tb.state(t)[d]);
      for (int d = 0; d < tb.dim; ++d) out << "," << g17(tb.estimate(t)[d]);
      for (const auto& [name, series] : tb.aux) out << "," << g17(series[t]);
      out << "\n";
    }
  }
  write_text_file(path, out.str());
}

EntropyGridSpec grid_from_json(const json& spec) {
  EntropyGridSpec grid;
  grid.epsilons = number_list(require_field(spec, "epsilons", "entropy_grid"),
                              "entropy_grid.epsilons");
  grid.horizons = int_list(require_field(spec, "horizons", "entropy_grid"),
                           "entropy_grid.horizons");
  grid.offset = spec.value("offset", grid.offset);
  grid.sample_size = spec.value("sample_size", grid.sample_size);
  grid.discard_fraction = spec.value("discard_fraction", grid.discard_fraction);
  return grid;
}

json grid_json(const EntropyGridSpec& grid) {
  return json{{"epsilons", grid.epsilons},
              {"horizons", grid.horizons},
              {"offset", grid.offset},
              {"sample_size", grid.sample_size},
              {"discard_fraction", grid.discard_fraction}};
}

}  // namespace

ExperimentConfig load_experiment_config(
    const std::string& path, const std::optional<std::uint64_t>& seed_flag,
    const std::optional<std::string>& output_dir_flag,
    const std::optional<int>& threads_flag) {
  ExperimentConfig config;
  config.source_path = path;
  config.doc = parse_json_file(path);
  if (!config.doc.is_object())
    throw config_error("config: top level must be a JSON object");

  if (seed_flag) {
    config.seed = *seed_flag;
  } else if (const char* env = std::getenv("ESTENT_SEED")) {
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw config_error("config: ESTENT_SEED must be an unsigned integer");
    config.seed = parsed;
  } else if (config.doc.contains("seed")) {
    const json& s = config.doc.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0))
      throw config_error("config: 'seed' must be a nonnegative integer");
    config.seed = s.get<std::uint64_t>();
  } else {
    throw config_error(
        "config: missing required field 'seed' (supply it in the file, via "
        "--seed, or via ESTENT_SEED)");
  }

  if (output_dir_flag) {
    config.output_dir = *output_dir_flag;
  } else {
    config.output_dir = config.doc.value("output_dir", std::string("."));
  }
  if (config.output_dir.empty())
    throw config_error("config: 'output_dir' must not be empty");

  if (threads_flag) {
    config.threads = *threads_flag;
  } else if (config.doc.contains("threads")) {
    config.threads = config.doc.at("threads").get<int>();
  } else {
    config.threads = default_threads();
  }
  if (config.threads < 1)
    throw config_error("config: 'threads' must be at least 1");

  // embed the resolved values so summaries archive the effective run
  config.doc["seed"] = config.seed;
  config.doc["output_dir"] = config.output_dir;
  config.doc["threads"] = config.threads;
  return config;
}

SystemModel system_from_json(const json& spec, const std::string& where) {
  if (!spec.is_object())
    throw config_error("config: '" + where + "' must be an object");
  const json& name = require_field(spec, "name", where);
  if (!name.is_string())
    throw config_error("config: '" + where + ".name' must be a string");
  return make_system(name.get<std::string>(),
                     spec.contains("params") ? spec.at("params") : json());
}

Channel channel_from_json(const json& spec, const std::string& where) {
  if (!spec.is_object())
    throw config_error("config: '" + where + "' must be an object");
  const json& kind = require_field(spec, "kind", where);
  if (!kind.is_string())
    throw config_error("config: '" + where + ".kind' must be a string");
  const std::string name = kind.get<std::string>();
  if (name == "noiseless") return Channel::noiseless(spec.value("alphabet", 2));
  if (name == "bsc") return Channel::bsc(require_number(spec, "p", where));
  if (name == "erasure")
    return Channel::erasure(require_number(spec, "p", where),
                            spec.value("alphabet", 2));
  if (name == "general") {
    const json& rows = require_field(spec, "rows", where);
    if (!rows.is_array() || rows.empty())
      throw config_error("config: '" + where + ".rows' must be a non-empty array");
    std::vector<std::vector<double>> matrix;
    for (std::size_t i = 0; i < rows.size(); ++i)
      matrix.push_back(number_list(rows[i], where + ".rows[" + std::to_string(i) + "]"));
    return Channel::general(matrix);
  }
  throw config_error("config: '" + where + ".kind' unknown channel kind '" + name + "'");
}

std::unique_ptr<Scheme> scheme_from_json(const json& spec, const SystemModel& system,
                                         const Channel& channel, double epsilon,
                                         int horizon, std::uint64_t seed) {
  if (!spec.is_object()) throw config_error("config: 'scheme' must be an object");
  const json& kind = require_field(spec, "kind", "scheme");
  const std::string name = kind.get<std::string>();
  if (name == "copy") return std::make_unique<CopyScheme>();
  if (name == "spanning") {
    SystemModel skeleton = system;
    skeleton.noise = NoiseSpec{};
    skeleton.noise_dim = 0;
    skeleton.additive = false;
    const int max_block =
        spec.value("max_block", spanning_blocks_for_horizon(horizon));
    SpanningScheme scheme =
        build_spanning_scheme(skeleton, epsilon, channel, max_block, seed,
                              spanning_options_from_json(spec));
    return std::make_unique<SpanningRunner>(std::move(scheme));
  }
  if (name == "zoom") {
    SchemeFactory family = make_zoom_family(
        int_list(require_field(spec, "rates", "scheme"), "scheme.rates"),
        number_list(require_field(spec, "initial_halfwidth", "scheme"),
                    "scheme.initial_halfwidth"));
    return family(system, channel, epsilon, horizon, seed);
  }
  throw config_error("config: 'scheme.kind' unknown scheme kind '" + name + "'");
}

void cmd_entropy(const ExperimentConfig& config) {
  const json& doc = config.doc;
  SystemModel system = system_from_json(require_field(doc, "system", "config"), "system");
  const json& grid_spec = require_field(doc, "entropy_grid", "config");
  EntropyGridSpec grid = grid_from_json(grid_spec);
  const std::string estimator = grid_spec.value("estimator", std::string("topological"));

  std::vector<std::vector<double>> counts;
  json summary{{"config", doc},
               {"estimator", estimator},
               {"grid", grid_json(grid)}};
  if (estimator == "topological" || estimator == "katok") {
    EntropyEstimate est =
        estimator == "topological"
            ? estimate_topological_entropy(system, grid, config.seed, config.threads)
            : estimate_katok_metric_entropy(system, grid, config.seed, config.threads);
    counts = est.counts;
    summary["extrapolated_rate"] = est.extrapolated_rate;
    summary["per_epsilon_rate"] = est.per_epsilon_rate;
    summary["per_epsilon_stderr"] = est.per_epsilon_stderr;
  } else if (estimator == "fibered") {
    const int noise_paths = grid_spec.value("noise_paths", 8);
    summary["grid"]["noise_paths"] = noise_paths;
    EntropyEstimate est = estimate_fibered_entropy(system, grid, noise_paths,
                                                   config.seed, config.threads);
    counts = est.counts;
    summary["extrapolated_rate"] = est.extrapolated_rate;
    summary["per_epsilon_rate"] = est.per_epsilon_rate;
    summary["per_epsilon_stderr"] = est.per_epsilon_stderr;
    summary["path_rates"] = est.path_rates;
    summary["rate_spread"] = est.rate_spread;
  } else if (estimator == "growth_curve") {
    GrowthCurve curve = entropy_growth_curve(system, grid, config.seed, config.threads);
    counts = curve.counts;
    summary["per_epsilon_rate"] = curve.per_epsilon_rate;
    summary["extrapolated_rate"] = curve.per_epsilon_rate.back();
  } else {
    throw config_error("config: 'entropy_grid.estimator' unknown estimator '" +
                       estimator + "'");
  }

  std::ostringstream table;
  table << "estimator,epsilon,horizon,count,rate_bits_per_step\n";
  for (std::size_t ei = 0; ei < grid.epsilons.size(); ++ei)
    for (std::size_t ni = 0; ni < grid.horizons.size(); ++ni) {
      const double count = counts[ei][ni];
      table << estimator << "," << g17(grid.epsilons[ei]) << ","
            << grid.horizons[ni] << "," << g17(count) << ","
            << g17(std::log2(count) / grid.horizons[ni]) << "\n";
    }

  fs::path dir = prepare_output_dir(config);
  write_text_file(dir / "entropy_table.csv", table.str());
  write_json_file(dir / "entropy_summary.json", summary);
}

void cmd_bounds(const ExperimentConfig& config) {
  const json& doc = config.doc;
  const json& requests = require_field(doc, "bounds", "config");
  if (!requests.is_array() || requests.empty())
    throw config_error("config: 'bounds' must be a non-empty array");

  fs::path dir = prepare_output_dir(config);
  json reports = json::array();
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const json& entry = requests[i];
    const std::string where = "bounds[" + std::to_string(i) + "]";
    const json& kind_field = require_field(entry, "kind", where);
    const std::string kind = kind_field.get<std::string>();

    BoundReport report;
    report.params = entry;
    if (kind == "ha" || kind == "zoom_upper") {
      auto spectrum = spectrum_from_json(
          require_field(entry, "eigenvalues", where), where + ".eigenvalues");
      if (kind == "ha") {
        report.kind = BoundKind::ha;
        std::vector<int> multiplicities(spectrum.size(), 1);
        if (entry.contains("multiplicities"))
          multiplicities =
              int_list(entry.at("multiplicities"), where + ".multiplicities");
        report.value_bits = linear_entropy(spectrum, multiplicities);
      } else {
        report.kind = BoundKind::zoom_upper;
        report.value_bits = zoom_capacity_upper(spectrum);
      }
    } else if (kind == "ar_rd") {
      report.kind = BoundKind::ar_rd;
      auto a = number_list(require_field(entry, "a", where), where + ".a");
      const double sigma2 = entry.value("sigma2", 1.0);
      const int quadrature = entry.value("quadrature_points", 8192);
      bool have_value = false;
      if (entry.contains("theta")) {
        ArRdResult point = ar_rate_distortion(
            a, sigma2, require_number(entry, "theta", where), quadrature);
        report.value_bits = point.rate_bits;
        report.details["distortion"] = point.distortion;
        report.details["correction_bits"] = point.correction_bits;
        report.details["boundary_roots"] = point.boundary_roots;
        report.details["roots"] = complex_list_json(point.roots);
        have_value = true;
      }
      if (entry.contains("curve")) {
        const json& curve_spec = entry.at("curve");
        const std::string cw = where + ".curve";
        std::vector<ArRdCurvePoint> curve = ar_rd_curve(
            a, sigma2, require_number(curve_spec, "theta_min", cw),
            require_number(curve_spec, "theta_max", cw),
            require_int(curve_spec, "num_points", cw), quadrature);
        std::ostringstream csv;
        csv << "theta,distortion,rate_bits,correction_bits\n";
        for (const ArRdCurvePoint& p : curve)
          csv << g17(p.theta) << "," << g17(p.distortion) << ","
              << g17(p.rate_bits) << "," << g17(p.correction_bits) << "\n";
        const std::string file = "ar_rd_curve_" + std::to_string(i) + ".csv";
        write_text_file(dir / file, csv.str());
        report.details["curve_file"] = file;
        if (!have_value) {
          report.value_bits = curve.front().rate_bits;
          report.details["correction_bits"] = curve.front().correction_bits;
          have_value = true;
        }
      }
      if (!have_value)
        throw config_error("config: '" + where +
                           "' needs 'theta' and/or a 'curve' block");
    } else if (kind == "shannon_lb") {
      report.kind = BoundKind::shannon_lb;
      const double epsilon = require_number(entry, "epsilon", where);
      double entropy_rate;
      int N;
      if (entry.contains("system")) {
        SystemModel system =
            system_from_json(entry.at("system"), where + ".system");
        entropy_rate = conditional_entropy_rate(system);
        N = system.state_dim;
      } else {
        entropy_rate = require_number(entry, "entropy_rate_bits", where);
        N = entry.value("N", 1);
      }
      report.value_bits = shannon_lower_bound(entropy_rate, N, epsilon);
      report.details["entropy_rate_bits"] = entropy_rate;
      report.details["N"] = N;
    } else if (kind == "gl_upper" || kind == "gl_lower") {
      report.kind = kind == "gl_upper" ? BoundKind::gl_upper : BoundKind::gl_lower;
      const double epsilon = require_number(entry, "epsilon", where);
      const int N = entry.value("N", 1);
      const double K2 = entry.value("K2", 1.0 / 12.0);
      double norm;
      if (entry.contains("norm")) {
        norm = require_number(entry, "norm", where);
      } else if (entry.contains("density")) {
        const json& density = entry.at("density");
        const std::string dw = where + ".density";
        const std::string density_kind =
            require_field(density, "kind", dw).get<std::string>();
        if (density_kind != "gaussian")
          throw config_error("config: '" + dw +
                             ".kind' only 'gaussian' is built in; supply 'norm' "
                             "directly otherwise");
        const double sigma2 = density.value("sigma2", 1.0);
        if (!(sigma2 > 0.0))
          throw config_error("config: '" + dw + ".sigma2' must be positive");
        const double halfwidth =
            density.value("box_halfwidth", 12.0 * std::sqrt(sigma2));
        const int quadrature = density.value("quadrature_points", 8192);
        std::vector<std::pair<double, double>> box(N, {-halfwidth, halfwidth});
        const double scale = 1.0 / std::pow(2.0 * M_PI * sigma2, N / 2.0);
        norm = density_norm(
            [N, sigma2, scale](const double* x) {
              double q = 0.0;
              for (int d = 0; d < N; ++d) q += x[d] * x[d];
              return scale * std::exp(-q / (2.0 * sigma2));
            },
            N, box, quadrature);
        report.details["sigma2"] = sigma2;
      } else {
        throw config_error("config: '" + where +
                           "' needs 'norm' or a 'density' block");
      }
      report.value_bits = kind == "gl_upper"
                              ? gl_capacity_upper(norm, N, epsilon, K2)
                              : gl_capacity_lower(norm, N, epsilon, K2);
      report.details["norm"] = norm;
      report.details["N"] = N;
      report.details["K2"] = K2;
    } else {
      throw config_error("config: '" + where + ".kind' unknown bound kind '" +
                         kind + "'");
    }
    reports.push_back(report_json(report));
  }

  write_json_file(dir / "bounds.json", json{{"config", doc}, {"reports", reports}});
}

void cmd_simulate(const ExperimentConfig& config) {
  const json& doc = config.doc;
  SystemModel system = system_from_json(require_field(doc, "system", "config"), "system");
  Channel channel =
      channel_from_json(require_field(doc, "channel", "config"), "channel");
  const json& objective = require_field(doc, "objective", "config");
  const double epsilon = require_number(objective, "epsilon", "objective");
  const int trials = require_int(objective, "trials", "objective");
  const int horizon = require_int(objective, "horizon", "objective");
  const int trace_trials = objective.value("trace_trials", 0);
  if (trace_trials < 0 || trace_trials > trials)
    throw config_error("config: 'objective.trace_trials' must lie in [0, trials]");

  std::unique_ptr<Scheme> scheme =
      scheme_from_json(require_field(doc, "scheme", "config"), system, channel,
                       epsilon, horizon, derive_seed(config.seed, 1));
  const std::uint64_t eval_seed = derive_seed(config.seed, 2);
  ObjectiveReport report = evaluate(system, channel, *scheme, epsilon, trials,
                                    horizon, eval_seed, config.threads);

  fs::path dir = prepare_output_dir(config);
  write_json_file(dir / "objective_report.json",
                  json{{"config", doc},
                       {"scheme", scheme_meta_json(*scheme)},
                       {"report", objective_report_json(report)}});
  if (trace_trials > 0)
    write_traces_csv(dir / "traces.csv", system, channel, *scheme, trace_trials,
                     horizon, eval_seed);
}

void cmd_sweep(const ExperimentConfig& config) {
  const json& doc = config.doc;
  SystemModel system = system_from_json(require_field(doc, "system", "config"), "system");
  const json& sweep = require_field(doc, "sweep", "config");
  const json& channels = require_field(sweep, "channels", "sweep");
  if (!channels.is_array() || channels.empty())
    throw config_error("config: 'sweep.channels' must be a non-empty array");

  std::vector<ChannelGridPoint> grid;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    ChannelGridPoint point;
    point.channel = channel_from_json(
        channels[i], "sweep.channels[" + std::to_string(i) + "]");
    point.capacity_bits = capacity_bits(point.channel);
    point.label = channel_label(channels[i], point.channel, i);
    grid.push_back(std::move(point));
  }

  const std::string family_name =
      require_field(sweep, "family", "sweep").get<std::string>();
  SchemeFactory family;
  if (family_name == "spanning") {
    family = make_spanning_family(spanning_options_from_json(sweep));
  } else if (family_name == "zoom") {
    family = make_zoom_family(
        int_list(require_field(sweep, "rates", "sweep"), "sweep.rates"),
        number_list(require_field(sweep, "initial_halfwidth", "sweep"),
                    "sweep.initial_halfwidth"));
  } else {
    throw config_error("config: 'sweep.family' unknown family '" + family_name + "'");
  }

  SweepTable table = capacity_sweep(
      system, family, grid,
      number_list(require_field(sweep, "epsilons", "sweep"), "sweep.epsilons"),
      require_int(sweep, "trials", "sweep"), require_int(sweep, "horizon", "sweep"),
      config.seed, config.threads);

  std::ostringstream csv;
  csv << "epsilon,capacity_bits,grid_index,label,pass_fraction\n";
  for (const SweepPoint& row : table.rows) {
    const std::string label =
        row.grid_index >= 0 ? grid[row.grid_index].label : "none";
    csv << g17(row.epsilon) << "," << g17(row.capacity_bits) << ","
        << row.grid_index << "," << label << "," << g17(row.pass_fraction) << "\n";
  }

  json grid_summary = json::array();
  for (const ChannelGridPoint& point : grid)
    grid_summary.push_back(
        {{"capacity_bits", point.capacity_bits}, {"label", point.label}});

  fs::path dir = prepare_output_dir(config);
  write_text_file(dir / "capacity_sweep.csv", csv.str());
  write_json_file(dir / "sweep_summary.json",
                  json{{"config", doc},
                       {"grid", grid_summary},
                       {"table", sweep_table_json(table, grid)}});
}

void run_subcommand(const std::string& name, const ExperimentConfig& config) {
  try {
    if (name == "entropy") return cmd_entropy(config);
    if (name == "bounds") return cmd_bounds(config);
    if (name == "simulate") return cmd_simulate(config);
    if (name == "sweep") return cmd_sweep(config);
  } catch (const nlohmann::json::exception& e) {
    // wrongly-typed config values surface as json access errors
    throw config_error(std::string("config: ") + e.what());
  }
  throw config_error("unknown subcommand '" + name + "'");
}

}  // namespace estent
