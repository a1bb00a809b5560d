#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <thread>

#include <CLI11.hpp>

#include "gdv/checkpoint.hpp"
#include "gdv/dbn.hpp"
#include "gdv/error.hpp"
#include "gdv/io.hpp"
#include "gdv/metric.hpp"
#include "gdv/mlp.hpp"
#include "gdv/projection.hpp"
#include "gdv/random.hpp"
#include "gdv/synthetic.hpp"
#include "gdv/transform.hpp"

namespace gdv::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char *kManifestSchema = "gdv-manifest/1";

unsigned default_threads() {
  if (const char *env = std::getenv("GDV_THREADS")) {
    char *end = nullptr;
    const unsigned long value = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// State shared by every subcommand: what to record in the manifest.
struct Run {
  std::string subcommand;
  fs::path manifest_path;
  std::vector<std::string> outputs;
  json seeds = json::object();
  json extra = json::object();

  fs::path output(const fs::path &path) {
    outputs.push_back(path.string());
    return path;
  }
};

struct Common {
  unsigned threads = 0;
  std::string manifest;
};

void add_common(CLI::App *sub, Common &common) {
  sub->add_option("--threads", common.threads, "Worker threads (fallback: GDV_THREADS, then hardware threads)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--manifest", common.manifest, "Run manifest path (default: inside the output directory)");
}

unsigned resolve_threads(const Common &common) { return common.threads > 0 ? common.threads : default_threads(); }

json resolved_config(const CLI::App &sub) {
  json config = json::object();
  for (const CLI::Option *opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    std::string key = opt->get_name();
    key.erase(0, key.find_first_not_of('-'));
    if (opt->count() > 0) {
      const auto results = opt->results();
      config[key] = results.size() == 1 ? json(results.front()) : json(results);
    } else {
      config[key] = opt->get_default_str();
    }
  }
  return config;
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_manifest(const Run &run, const CLI::App &sub, double seconds, int exit_code, const json &error) {
  if (run.manifest_path.empty()) return;
  json manifest = {
      {"schema", kManifestSchema},
      {"subcommand", run.subcommand},
      {"toolkit_version", GDV_VERSION},
      {"config", resolved_config(sub)},
      {"seeds", run.seeds},
      {"wall_clock_seconds", seconds},
      {"outputs", run.outputs},
      {"exit_code", exit_code},
      {"status", exit_code == 0 ? "ok" : "error"},
  };
  if (!error.is_null()) manifest["error"] = error;
  if (!run.extra.empty()) manifest["details"] = run.extra;
  try {
    if (run.manifest_path.has_parent_path()) ensure_dir(run.manifest_path.parent_path());
    write_json(run.manifest_path, manifest);
  } catch (const std::exception &e) {
    std::cerr << "gdv: could not write manifest: " << e.what() << '\n';
  }
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Io: return 1;
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Numeric: return 3;
  }
  return 2;
}

// ---------------------------------------------------------------------------
// Dataset loading shared by the training and probing subcommands.

struct DataOptions {
  std::string data;
  std::string labels;
  std::vector<Label> classes;
  std::size_t limit = 0;
};

void add_data_options(CLI::App *sub, DataOptions &opts, const std::string &prefix = "") {
  sub->add_option("--" + prefix + "data", opts.data, "Labeled CSV, or IDX image file")->check(CLI::ExistingFile);
  sub->add_option("--" + prefix + "labels", opts.labels, "IDX label file paired with an IDX image file")
      ->check(CLI::ExistingFile);
  if (prefix.empty()) {
    sub->add_option("--classes", opts.classes, "Keep only these class ids")->delimiter(',');
    sub->add_option("--limit", opts.limit, "Keep at most this many rows (0 = all)");
  }
}

LabeledDataset load_data(const DataOptions &opts, std::span<const Label> classes, std::size_t limit) {
  if (opts.data.empty()) throw Error(ErrorKind::InvalidInput, "no --data given");
  LabeledDataset data;
  const fs::path path(opts.data);
  if (path.extension() == ".csv") {
    data = load_labeled_csv(path);
  } else {
    if (opts.labels.empty()) throw Error(ErrorKind::InvalidInput, "IDX images need --labels");
    data = load_idx_dataset(path, opts.labels);
  }
  if (!classes.empty() || limit > 0) {
    std::vector<Label> keep(classes.begin(), classes.end());
    if (keep.empty()) {
      for (const auto &[label, rows] : class_members(data.labels)) keep.push_back(label);
    }
    data = filter_classes(data, keep, limit);
  }
  return data;
}

LabeledDataset load_data(const DataOptions &opts) { return load_data(opts, opts.classes, opts.limit); }

std::size_t class_count(const LabeledDataset &data) {
  return data.labels.empty() ? 0 : *std::max_element(data.labels.begin(), data.labels.end()) + 1;
}

Projection2D identity_projection(const Matrix &points) {
  Projection2D p;
  p.coords = points.leftCols(2);
  p.sample_indices.resize(static_cast<std::size_t>(points.rows()));
  std::iota(p.sample_indices.begin(), p.sample_indices.end(), std::size_t{0});
  return p;
}

void write_curve_outputs(Run &run, const fs::path &dir, const std::string &stem, const GdvCurve &curve,
                         const std::string &title) {
  write_json(run.output(dir / (stem + ".json")), curve_to_json(curve));
  write_curve_csv(run.output(dir / (stem + ".csv")), curve);
  const LineSeries series[] = {curve_series(stem, curve)};
  write_svg_lines(run.output(dir / (stem + ".svg")), series, title, "layer index L", "GDV");
}

std::string describe(const GdvCurve &curve) {
  std::ostringstream out;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto &p = curve.points[i];
    out << "  " << i << ' ' << p.layer_id << ' ';
    if (p.gdv) {
      out << format_double(*p.gdv);
    } else {
      out << "missing (" << to_string(*p.failure) << ')';
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

struct GdvCmd {
  Common common;
  std::string input;
  std::string output;
  std::string curve_csv;
  std::string svg;
  std::string metric = "euclidean";
};

bool is_archive(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string_view(magic, 4) == "GDVA";
}

void run_gdv(GdvCmd &cmd, Run &run) {
  GdvOptions options;
  options.metric = parse_metric(cmd.metric);
  options.threads = resolve_threads(cmd.common);
  const fs::path output(cmd.output);
  if (output.has_parent_path()) ensure_dir(output.parent_path());

  if (is_archive(cmd.input)) {
    const auto archive = read_activation_archive(cmd.input);
    const auto layers = archive_layers(archive);
    const GdvCurve curve = gdv_curve(layers, options);
    if (output.extension() == ".csv") {
      write_curve_csv(run.output(output), curve);
    } else {
      write_json(run.output(output), curve_to_json(curve));
    }
    if (!cmd.curve_csv.empty()) write_curve_csv(run.output(cmd.curve_csv), curve);
    if (!cmd.svg.empty()) {
      const LineSeries series[] = {curve_series(fs::path(cmd.input).stem().string(), curve)};
      write_svg_lines(run.output(cmd.svg), series, archive.provenance);
    }
    run.extra["provenance"] = archive.provenance;
    std::cout << "GDV curve over " << curve.size() << " layers\n" << describe(curve);
  } else {
    const auto data = load_labeled_csv(cmd.input);
    const GdvReport report = compute_gdv(data, options);
    write_report_json(run.output(output), report);
    if (!cmd.svg.empty()) {
      const Projection2D projection = data.dim() == 2 ? identity_projection(z_score_half(data).points)
                                                       : mds_project(z_score_half(data).points);
      write_svg_scatter(run.output(cmd.svg), projection, data.labels,
                        "GDV = " + format_double(std::round(report.gdv * 1e4) / 1e4));
    }
    std::cout << "GDV = " << format_double(report.gdv) << " (N=" << data.size() << ", D'=" << report.effective_dim
              << ", L=" << report.n_classes << ")\n";
  }
}

// ---------------------------------------------------------------------------

struct Fig1Cmd {
  Common common;
  std::uint64_t seed = 42;
  std::string out_dir;
  std::size_t points_per_class = 500;
  std::size_t repeats = 20;
  std::size_t max_dim = 20;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(const std::vector<double> &values) {
  Summary s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

void run_fig1(Fig1Cmd &cmd, Run &run) {
  if (cmd.repeats < 1) throw Error(ErrorKind::InvalidSpec, "--repeats must be at least 1");
  if (cmd.max_dim < 3) throw Error(ErrorKind::InvalidSpec, "--max-dim must be at least 3");
  const fs::path dir(cmd.out_dir);
  GdvOptions options;
  options.threads = resolve_threads(cmd.common);
  run.seeds["base"] = cmd.seed;
  run.seeds["per_repeat"] = "derive_seed(base, r) for r = 0..repeats-1";

  struct Case {
    std::string id;
    std::string description;
    double sigma;
    bool embed;
  };
  const std::vector<Case> cases = {
      {"a", "separated, 2-D", 0.2, false},
      {"b", "separated, (x,y,y)", 0.2, true},
      {"c", "overlapping, 2-D", 1.0, false},
      {"d", "overlapping, (x,y,y)", 1.0, true},
  };

  std::ofstream table(run.output(dir / "fig1_table.csv"));
  if (!table) throw Error(ErrorKind::IoError, "cannot create " + (dir / "fig1_table.csv").string());
  table << "case,description,dim,sigma,points_per_class,repeats,gdv_mean,gdv_stddev,gdv_min,gdv_max\n";
  json summary = {{"cases", json::array()}};
  for (const auto &c : cases) {
    std::vector<double> values;
    for (std::size_t r = 0; r < cmd.repeats; ++r) {
      LabeledDataset data = generate_clusters(two_cluster_spec(c.sigma, cmd.points_per_class, derive_seed(cmd.seed, r)));
      if (c.embed) data = embed_duplicate_y(data);
      values.push_back(compute_gdv(data, options).gdv);
    }
    const Summary s = summarize(values);
    table << c.id << ',' << c.description << ',' << (c.embed ? 3 : 2) << ',' << c.sigma << ','
          << cmd.points_per_class << ',' << cmd.repeats << ',' << format_double(s.mean) << ','
          << format_double(s.stddev) << ',' << format_double(s.min) << ',' << format_double(s.max) << '\n';
    summary["cases"].push_back({{"case", c.id}, {"description", c.description}, {"gdv_mean", s.mean},
                                {"gdv_stddev", s.stddev}, {"values", values}});
    std::cout << "case " << c.id << " (" << c.description << "): GDV = " << s.mean << " +- " << s.stddev << '\n';
  }
  table.close();

  // Embedding sweep on the first repeat of the separated and overlapping data.
  const LabeledDataset a = generate_clusters(two_cluster_spec(0.2, cmd.points_per_class, cmd.seed));
  const LabeledDataset c = generate_clusters(two_cluster_spec(1.0, cmd.points_per_class, cmd.seed));
  const double a2 = compute_gdv(a, options).gdv;
  const double c2 = compute_gdv(c, options).gdv;
  LineSeries sweep_a{"separated (sigma 0.2)", {}, {}};
  LineSeries sweep_c{"overlapping (sigma 1)", {}, {}};
  std::ofstream sweep(run.output(dir / "fig1_sweep.csv"));
  sweep << "dim,gdv_separated,gdv_overlapping\n";
  double worst = 0.0;
  for (std::size_t d = 2; d <= cmd.max_dim; ++d) {
    const double ga = d == 2 ? a2 : compute_gdv(embed_by_replication(a, d), options).gdv;
    const double gc = d == 2 ? c2 : compute_gdv(embed_by_replication(c, d), options).gdv;
    worst = std::max({worst, std::abs(ga - a2), std::abs(gc - c2)});
    sweep << d << ',' << format_double(ga) << ',' << format_double(gc) << '\n';
    sweep_a.x.push_back(static_cast<double>(d));
    sweep_a.y.push_back(ga);
    sweep_c.x.push_back(static_cast<double>(d));
    sweep_c.y.push_back(gc);
  }
  sweep.close();
  const double duplication = std::abs(compute_gdv(duplicate_all_coordinates(a), options).gdv - a2);
  summary["sweep_max_deviation"] = worst;
  summary["full_duplication_deviation"] = duplication;
  std::cout << "embedding sweep 2.." << cmd.max_dim << ": max |GDV(d) - GDV(2)| = " << worst
            << ", full duplication deviation = " << duplication << '\n';

  json probes = json::array();
  for (std::size_t dim : {1, 2, 3}) {
    const SeparationProbe p = probe_two_sigma_separation(dim, cmd.points_per_class, derive_seed(cmd.seed, 1000 + dim));
    auto value = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    probes.push_back({{"dim", dim}, {"gdv_center_distance_2sigma", p.gdv_center_reading},
                      {"gdv_mean_pair_distance_2sigma", value(p.gdv_pair_reading)},
                      {"pair_reading_center_offset", value(p.pair_reading_offset)}});
    std::cout << "two-sigma probe, D=" << dim << ": centre reading " << p.gdv_center_reading << ", pair reading "
              << p.gdv_pair_reading << '\n';
  }
  summary["two_sigma_probe"] = probes;
  write_json(run.output(dir / "fig1.json"), summary);

  write_svg_scatter(run.output(dir / "fig1a.svg"), identity_projection(a.points), a.labels,
                    "separated, GDV " + std::to_string(a2).substr(0, 6));
  write_svg_scatter(run.output(dir / "fig1c.svg"), identity_projection(c.points), c.labels,
                    "overlapping, GDV " + std::to_string(c2).substr(0, 6));
  const LineSeries series[] = {sweep_a, sweep_c};
  write_svg_lines(run.output(dir / "fig1f.svg"), series, "embedding sweep", "dimension", "GDV");
}

// ---------------------------------------------------------------------------

struct EnsembleCmd {
  Common common;
  std::vector<std::string> kinds{"all"};
  std::size_t n = 1000;
  std::uint64_t seed = 20190701;
  std::uint64_t transform_seed = 0x5EEDF00DULL;
  std::string frame = "half-z";
  std::string sigma_mode = "per-class";
  std::string size_mode = "per-class";
  std::string out_dir;
};

void run_ensemble(EnsembleCmd &cmd, Run &run) {
  const fs::path dir(cmd.out_dir);
  EnsembleConfig cfg;
  cfg.n_datasets = cmd.n;
  cfg.seed = cmd.seed;
  cfg.sigma_mode = cmd.sigma_mode == "shared" ? SigmaMode::Shared : SigmaMode::PerClass;
  cfg.size_mode = cmd.size_mode == "per-dataset" ? SizeMode::PerDataset : SizeMode::PerClass;
  cfg.validate();
  DeltaOptions options;
  options.frame = cmd.frame == "raw" ? InputFrame::Raw : InputFrame::HalfZScored;
  options.transform_seed = cmd.transform_seed;
  options.threads = resolve_threads(cmd.common);
  run.seeds["ensemble"] = cmd.seed;
  run.seeds["transform"] = cmd.transform_seed;

  std::vector<TransformKind> kinds;
  for (const auto &name : cmd.kinds) {
    if (name == "all") {
      kinds.assign(std::begin(kAllTransformKinds), std::end(kAllTransformKinds));
    } else if (name != "none") {
      kinds.push_back(parse_transform_kind(name));
    }
  }

  const EnsembleGdvStats base = ensemble_gdv(cfg, options.threads);
  write_json(run.output(dir / "ensemble.json"), ensemble_stats_to_json(base));
  write_histogram_csv(run.output(dir / "ensemble_hist.csv"), base.histogram);
  std::cout << "ensemble of " << cfg.n_datasets << ": mean GDV " << base.mean_gdv << " (valid " << base.n_valid
            << ", skipped " << base.n_skipped << ")\n";
  if (kinds.empty()) return;

  const auto stats = delta_gdv_experiments(cfg, kinds, options);
  std::vector<LineSeries> series;
  json summary = {{"mean_gdv", base.mean_gdv}, {"kinds", json::object()}};
  for (const auto &s : stats) {
    const std::string name(to_string(s.kind));
    write_json(run.output(dir / ("delta_" + name + ".json")), delta_stats_to_json(s));
    write_histogram_csv(run.output(dir / ("delta_" + name + "_hist.csv")), s.histogram);
    LineSeries line{name, {}, {}};
    for (std::size_t b = 0; b < s.histogram.bins(); ++b) {
      line.x.push_back(s.histogram.bin_center(b));
      line.y.push_back(static_cast<double>(s.histogram.counts()[b]) / std::max<double>(1.0, s.histogram.total()));
    }
    series.push_back(std::move(line));
    summary["kinds"][name] = {{"mean_delta", s.mean_delta}, {"stddev_delta", s.stddev_delta}, {"n_valid", s.n_valid}};
    std::cout << name << ": mean dGDV " << s.mean_delta << " (sd " << s.stddev_delta << ", valid " << s.n_valid
              << ", skipped " << s.n_skipped << ")\n";
  }
  auto find = [&](TransformKind kind) -> const DeltaGdvStats * {
    for (const auto &s : stats) {
      if (s.kind == kind) return &s;
    }
    return nullptr;
  };
  const std::pair<TransformKind, TransformKind> pairs[] = {
      {TransformKind::RandomLinear, TransformKind::RandomLinearDoubleDim},
      {TransformKind::RandomLinearLogistic, TransformKind::RandomLinearDoubleDimLogistic}};
  for (const auto &[square, doubled] : pairs) {
    const auto *a = find(square);
    const auto *b = find(doubled);
    if (a && b) {
      const double tv = total_variation(a->histogram, b->histogram);
      summary["total_variation"][std::string(to_string(doubled))] = tv;
      std::cout << "TV(" << to_string(square) << ", " << to_string(doubled) << ") = " << tv << '\n';
    }
  }
  write_json(run.output(dir / "ensemble_summary.json"), summary);
  write_svg_lines(run.output(dir / "delta_hist.svg"), series, "p(dGDV)", "dGDV", "fraction");
}

// ---------------------------------------------------------------------------

struct TrainMlpCmd {
  Common common;
  DataOptions data;
  DataOptions test;
  double test_fraction = 0.2;
  std::vector<std::size_t> widths{64, 64, 64, 64, 64, 64, 64, 64};
  std::size_t decreasing = 0;
  std::string activation = "relu";
  std::size_t epochs = 10;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  std::string out_dir;
};

std::pair<LabeledDataset, LabeledDataset> split_tail(const LabeledDataset &data, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorKind::InvalidSpec, "--test-fraction must lie in (0, 1)");
  const auto n = data.size();
  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  if (n_test >= n) throw Error(ErrorKind::InvalidInput, "dataset too small to split");
  std::vector<std::size_t> train(n - n_test), test(n_test);
  std::iota(train.begin(), train.end(), std::size_t{0});
  std::iota(test.begin(), test.end(), n - n_test);
  return {select_rows(data, train), select_rows(data, test)};
}

void run_train_mlp(TrainMlpCmd &cmd, Run &run) {
  const fs::path dir(cmd.out_dir);
  LabeledDataset train = load_data(cmd.data);
  LabeledDataset test;
  if (!cmd.test.data.empty()) {
    test = load_data(cmd.test, cmd.data.classes, 0);
  } else {
    std::tie(train, test) = split_tail(train, cmd.test_fraction);
  }

  MlpConfig config;
  config.layer_widths.push_back(train.dim());
  const auto hidden = cmd.decreasing > 0 ? decreasing_widths(cmd.decreasing) : cmd.widths;
  config.layer_widths.insert(config.layer_widths.end(), hidden.begin(), hidden.end());
  config.layer_widths.push_back(std::max(class_count(train), class_count(test)));
  config.hidden_activation = parse_activation(cmd.activation);
  config.learning_rate = cmd.lr;
  config.epochs = cmd.epochs;
  config.batch_size = cmd.batch;
  config.seed = cmd.seed;
  run.seeds["model"] = cmd.seed;

  const MlpModel model = mlp_train(config, train);
  save_mlp(run.output(dir / "model.gdvm"), model);
  std::ofstream history(run.output(dir / "history.csv"));
  history << "epoch,loss,accuracy\n";
  for (std::size_t e = 0; e < model.history.size(); ++e) {
    history << e + 1 << ',' << format_double(model.history[e].loss) << ','
            << format_double(model.history[e].accuracy) << '\n';
  }
  history.close();
  const double train_acc = mlp_accuracy(model, train);
  const double test_acc = mlp_accuracy(model, test);
  write_json(run.output(dir / "metrics.json"),
             {{"train_rows", train.size()}, {"test_rows", test.size()}, {"parameters", model.parameter_count()},
              {"train_accuracy", train_acc}, {"test_accuracy", test_acc}, {"widths", config.layer_widths}});
  std::cout << "trained " << config.layer_widths.size() - 1 << " dense layers (" << model.parameter_count()
            << " parameters): train accuracy " << train_acc << ", test accuracy " << test_acc << '\n';
}

// ---------------------------------------------------------------------------

struct ProbeCmd {
  Common common;
  std::string model;
  DataOptions data;
  std::vector<std::size_t> layers;
  std::size_t max_points = 3000;
  std::uint64_t mds_seed = 1;
  std::string archive;
  std::string out_dir;
};

std::vector<LayerData> model_layers(const fs::path &model, const LabeledDataset &data, std::string &provenance) {
  if (peek_model_kind(model) == ModelKind::Mlp) {
    const MlpModel mlp = load_mlp(model);
    provenance = "mlp " + model.filename().string();
    return mlp_layer_activations(mlp, data);
  }
  const DbnModel dbn = load_dbn(model);
  provenance = "dbn " + model.filename().string();
  return dbn_layer_representations(dbn, data);
}

void run_probe(ProbeCmd &cmd, Run &run) {
  const fs::path dir(cmd.out_dir);
  const LabeledDataset data = load_data(cmd.data);
  std::string provenance;
  const auto layers = model_layers(cmd.model, data, provenance);
  GdvOptions options;
  options.threads = resolve_threads(cmd.common);
  const GdvCurve curve = gdv_curve(layers, options);
  write_curve_outputs(run, dir, "curve", curve, provenance);
  std::cout << "GDV curve (" << provenance << ", " << data.size() << " rows)\n" << describe(curve);

  std::vector<std::size_t> chosen = cmd.layers;
  if (chosen.empty()) chosen = {0, layers.size() - 1};
  MdsOptions mds;
  mds.max_points = cmd.max_points;
  mds.seed = cmd.mds_seed;
  run.seeds["mds"] = cmd.mds_seed;
  for (std::size_t index : chosen) {
    if (index >= layers.size()) {
      throw Error(ErrorKind::LayerOutOfRange, "layer " + std::to_string(index) + " of " + std::to_string(layers.size()));
    }
    const auto &layer = layers[index];
    const Projection2D projection = mds_project(layer.data.points, mds);
    const std::string stem = "scatter_" + std::to_string(index) + "_" + layer.layer_id;
    write_scatter_csv(run.output(dir / (stem + ".csv")), projection, layer.data.labels);
    std::string title = layer.layer_id;
    if (curve.points[index].gdv) title += ", GDV " + std::to_string(*curve.points[index].gdv).substr(0, 6);
    write_svg_scatter(run.output(dir / (stem + ".svg")), projection, layer.data.labels, title);
  }
  if (!cmd.archive.empty()) {
    write_activation_archive(run.output(cmd.archive), make_activation_archive(layers, provenance));
  }
}

// ---------------------------------------------------------------------------

struct TrainDbnCmd {
  Common common;
  DataOptions data;
  std::vector<std::size_t> widths{256, 256, 256, 256, 256, 256, 256, 256, 256, 256};
  std::size_t decreasing = 0;
  std::vector<std::size_t> epochs{5};
  double lr = 0.05;
  std::size_t cd_steps = 1;
  std::size_t batch = 32;
  double init_sd = 0.01;
  std::uint64_t seed = 1;
  std::string out_dir;
};

void run_train_dbn(TrainDbnCmd &cmd, Run &run) {
  const fs::path dir(cmd.out_dir);
  const LabeledDataset data = load_data(cmd.data);
  std::vector<std::size_t> widths{data.dim()};
  const auto hidden = cmd.decreasing > 0 ? decreasing_widths(cmd.decreasing) : cmd.widths;
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  DbnTrainConfig config;
  config.epochs_per_layer = cmd.epochs;
  config.rbm.learning_rate = cmd.lr;
  config.rbm.cd_steps = cmd.cd_steps;
  config.rbm.batch_size = cmd.batch;
  config.rbm.init_stddev = cmd.init_sd;
  config.rbm.seed = cmd.seed;
  run.seeds["model"] = cmd.seed;

  const DbnModel model = dbn_train_greedy(widths, data.points, config);
  save_dbn(run.output(dir / "model.gdvm"), model);
  GdvOptions options;
  options.threads = resolve_threads(cmd.common);
  const GdvCurve curve = gdv_curve(dbn_layer_representations(model, data), options);
  write_curve_outputs(run, dir, "curve", curve, "DBN");
  std::cout << "trained " << model.depth() << " RBMs on " << data.size() << " rows\n" << describe(curve);
}

// ---------------------------------------------------------------------------

struct DreamCmd {
  Common common;
  std::string model;
  DataOptions data;
  std::vector<std::size_t> layers{1};
  std::vector<Label> classes{0};
  std::string out_dir;
};

void write_pgm(const fs::path &path, const Matrix &pixels) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  out << "P2\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
    for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
      out << static_cast<int>(std::lround(255.0 * std::clamp(pixels(r, c), 0.0, 1.0))) << (c + 1 < pixels.cols() ? ' ' : '\n');
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

void run_dream(DreamCmd &cmd, Run &run) {
  const fs::path dir(cmd.out_dir);
  const DbnModel model = load_dbn(cmd.model);
  const LabeledDataset data = load_data(cmd.data);
  for (Label class_id : cmd.classes) {
    for (std::size_t layer : cmd.layers) {
      const PrototypeImage image = prototype_reconstruct(model, layer, class_id, data);
      const std::string stem = "prototype_c" + std::to_string(class_id) + "_l" + std::to_string(layer);
      write_pgm(run.output(dir / (stem + ".pgm")), image.pixels);
      std::ofstream csv(run.output(dir / (stem + ".csv")));
      for (Eigen::Index r = 0; r < image.pixels.rows(); ++r) {
        for (Eigen::Index c = 0; c < image.pixels.cols(); ++c) {
          csv << format_double(image.pixels(r, c)) << (c + 1 < image.pixels.cols() ? ',' : '\n');
        }
      }
      std::cout << "wrote " << stem << '\n';
    }
  }
}

}  // namespace

int run(int argc, const char *const *argv) {
  CLI::App app{"Generalized discrimination value toolkit", "gdv"};
  app.set_version_flag("--version", std::string(GDV_VERSION));
  app.set_config("--config", "", "TOML-style config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Run run;
  std::function<void()> action;
  fs::path default_manifest;
  fs::path out_dir;
  const Common *active = nullptr;

  GdvCmd gdv_cmd;
  auto *gdv = app.add_subcommand("gdv", "GDV of a labeled CSV, or GDV curve of an activation archive");
  gdv->add_option("--input", gdv_cmd.input, "Labeled CSV or GDVA archive")->required()->check(CLI::ExistingFile);
  gdv->add_option("--output", gdv_cmd.output, "Report JSON (curve CSV if the name ends in .csv)")->required();
  gdv->add_option("--curve-csv", gdv_cmd.curve_csv, "Additional curve CSV for archive input");
  gdv->add_option("--svg", gdv_cmd.svg, "Scatter (CSV input) or curve (archive input) plot");
  gdv->add_option("--metric", gdv_cmd.metric, "Distance metric");
  add_common(gdv, gdv_cmd.common);
  gdv->callback([&] {
    active = &gdv_cmd.common;
    default_manifest = fs::path(gdv_cmd.output).concat(".manifest.json");
    action = [&] { run_gdv(gdv_cmd, run); };
  });

  Fig1Cmd fig1_cmd;
  auto *fig1 = app.add_subcommand("fig1", "Artificial two-cluster demonstration and embedding sweep");
  fig1->add_option("--seed", fig1_cmd.seed, "Base seed");
  fig1->add_option("--out-dir", fig1_cmd.out_dir, "Output directory")->required();
  fig1->add_option("--points-per-class", fig1_cmd.points_per_class, "Points per class")->check(CLI::PositiveNumber);
  fig1->add_option("--repeats", fig1_cmd.repeats, "Independent datasets per case")->check(CLI::PositiveNumber);
  fig1->add_option("--max-dim", fig1_cmd.max_dim, "Largest dimension of the embedding sweep");
  add_common(fig1, fig1_cmd.common);
  fig1->callback([&] {
    active = &fig1_cmd.common;
    out_dir = fig1_cmd.out_dir;
    default_manifest = fs::path(fig1_cmd.out_dir) / "manifest.json";
    action = [&] { run_fig1(fig1_cmd, run); };
  });

  EnsembleCmd ens_cmd;
  auto *ens = app.add_subcommand("ensemble", "Random Gaussian ensemble and transform GDV changes");
  ens->add_option("--kind", ens_cmd.kinds, "Transform kind(s), 'all' or 'none'")->delimiter(',');
  ens->add_option("--n", ens_cmd.n, "Number of datasets")->check(CLI::PositiveNumber);
  ens->add_option("--seed", ens_cmd.seed, "Ensemble seed");
  ens->add_option("--transform-seed", ens_cmd.transform_seed, "Seed for the random matrices");
  ens->add_option("--frame", ens_cmd.frame, "Coordinates transformed: half-z or raw")
      ->check(CLI::IsMember({"half-z", "raw"}));
  ens->add_option("--sigma-mode", ens_cmd.sigma_mode, "per-class or shared")
      ->check(CLI::IsMember({"per-class", "shared"}));
  ens->add_option("--size-mode", ens_cmd.size_mode, "per-class or per-dataset")
      ->check(CLI::IsMember({"per-class", "per-dataset"}));
  ens->add_option("--out-dir", ens_cmd.out_dir, "Output directory")->required();
  add_common(ens, ens_cmd.common);
  ens->callback([&] {
    active = &ens_cmd.common;
    out_dir = ens_cmd.out_dir;
    default_manifest = fs::path(ens_cmd.out_dir) / "manifest.json";
    action = [&] { run_ensemble(ens_cmd, run); };
  });

  TrainMlpCmd mlp_cmd;
  auto *mlp = app.add_subcommand("train-mlp", "Train a dense ReLU classifier with ADAM");
  add_data_options(mlp, mlp_cmd.data);
  mlp->get_option("--data")->required();
  add_data_options(mlp, mlp_cmd.test, "test-");
  mlp->add_option("--test-fraction", mlp_cmd.test_fraction, "Held-out tail fraction when no --test-data is given");
  mlp->add_option("--widths", mlp_cmd.widths, "Hidden layer widths")->delimiter(',');
  mlp->add_option("--decreasing", mlp_cmd.decreasing, "N hidden layers of widths 256, 246, ... (overrides --widths)");
  mlp->add_option("--activation", mlp_cmd.activation, "relu, tanh or logistic");
  mlp->add_option("--epochs", mlp_cmd.epochs, "Training epochs");
  mlp->add_option("--batch", mlp_cmd.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  mlp->add_option("--lr", mlp_cmd.lr, "ADAM learning rate");
  mlp->add_option("--seed", mlp_cmd.seed, "Initialization and shuffling seed");
  mlp->add_option("--out-dir", mlp_cmd.out_dir, "Output directory")->required();
  add_common(mlp, mlp_cmd.common);
  mlp->callback([&] {
    active = &mlp_cmd.common;
    out_dir = mlp_cmd.out_dir;
    default_manifest = fs::path(mlp_cmd.out_dir) / "manifest.json";
    action = [&] { run_train_mlp(mlp_cmd, run); };
  });

  ProbeCmd probe_cmd;
  auto *probe = app.add_subcommand("probe", "GDV curve and MDS scatters of a trained model's layers");
  probe->add_option("--model", probe_cmd.model, "GDVM checkpoint")->required()->check(CLI::ExistingFile);
  add_data_options(probe, probe_cmd.data);
  probe->get_option("--data")->required();
  probe->add_option("--layers", probe_cmd.layers, "Layer indices to project (default: first and last)")
      ->delimiter(',');
  probe->add_option("--max-points", probe_cmd.max_points, "MDS subsample size");
  probe->add_option("--mds-seed", probe_cmd.mds_seed, "MDS subsample and start seed");
  probe->add_option("--archive", probe_cmd.archive, "Also write all activations as a GDVA archive");
  probe->add_option("--out-dir", probe_cmd.out_dir, "Output directory")->required();
  add_common(probe, probe_cmd.common);
  probe->callback([&] {
    active = &probe_cmd.common;
    out_dir = probe_cmd.out_dir;
    default_manifest = fs::path(probe_cmd.out_dir) / "manifest.json";
    action = [&] { run_probe(probe_cmd, run); };
  });

  TrainDbnCmd dbn_cmd;
  auto *dbn = app.add_subcommand("train-dbn", "Greedy contrastive-divergence training of a deep belief network");
  add_data_options(dbn, dbn_cmd.data);
  dbn->get_option("--data")->required();
  dbn->add_option("--widths", dbn_cmd.widths, "Hidden layer widths")->delimiter(',');
  dbn->add_option("--decreasing", dbn_cmd.decreasing, "N RBMs of hidden widths 256, 246, ... (overrides --widths)");
  dbn->add_option("--epochs", dbn_cmd.epochs, "Epochs per RBM (one value, or one per RBM)")->delimiter(',');
  dbn->add_option("--lr", dbn_cmd.lr, "Learning rate");
  dbn->add_option("--cd-steps", dbn_cmd.cd_steps, "Gibbs alternations per update")->check(CLI::PositiveNumber);
  dbn->add_option("--batch", dbn_cmd.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  dbn->add_option("--init-sd", dbn_cmd.init_sd, "Standard deviation of the initial weights");
  dbn->add_option("--seed", dbn_cmd.seed, "Training seed");
  dbn->add_option("--out-dir", dbn_cmd.out_dir, "Output directory")->required();
  add_common(dbn, dbn_cmd.common);
  dbn->callback([&] {
    active = &dbn_cmd.common;
    out_dir = dbn_cmd.out_dir;
    default_manifest = fs::path(dbn_cmd.out_dir) / "manifest.json";
    action = [&] { run_train_dbn(dbn_cmd, run); };
  });

  DreamCmd dream_cmd;
  auto *dream = app.add_subcommand("dream", "Prototype input patterns of a trained DBN");
  dream->add_option("--model", dream_cmd.model, "DBN checkpoint")->required()->check(CLI::ExistingFile);
  add_data_options(dream, dream_cmd.data);
  dream->get_option("--data")->required();
  dream->add_option("--layer", dream_cmd.layers, "Layer index (repeatable)")->delimiter(',');
  dream->add_option("--class", dream_cmd.classes, "Class id (repeatable)")->delimiter(',');
  dream->add_option("--out-dir", dream_cmd.out_dir, "Output directory")->required();
  add_common(dream, dream_cmd.common);
  dream->callback([&] {
    active = &dream_cmd.common;
    out_dir = dream_cmd.out_dir;
    default_manifest = fs::path(dream_cmd.out_dir) / "manifest.json";
    action = [&] { run_dream(dream_cmd, run); };
  });

  // Usage errors never start a run, so they produce no manifest.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App *sub = app.get_subcommands().front();
  run.subcommand = sub->get_name();
  run.manifest_path = !active->manifest.empty() ? fs::path(active->manifest) : default_manifest;
  run.extra["threads"] = resolve_threads(*active);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  int code = 0;
  json error;
  try {
    if (!out_dir.empty()) ensure_dir(out_dir);
    action();
  } catch (const Error &e) {
    code = exit_code_for(category(e.kind()));
    error = {{"kind", std::string(to_string(e.kind()))}, {"message", e.detail()}};
  } catch (const fs::filesystem_error &e) {
    code = 1;
    error = {{"kind", "IoError"}, {"message", e.what()}};
  } catch (const std::bad_alloc &) {
    code = 3;
    error = {{"kind", "OutOfMemory"}, {"message", "allocation failed"}};
  } catch (const std::exception &e) {
    code = 2;
    error = {{"kind", "InvalidInput"}, {"message", e.what()}};
  }
  if (code != 0) {
    std::cerr << "gdv " << run.subcommand << ": error: " << error["kind"].get<std::string>() << ": "
              << error["message"].get<std::string>() << '\n';
  }
  write_manifest(run, *sub, elapsed(), code, error);
  return code;
}

}  // namespace gdv::cli
