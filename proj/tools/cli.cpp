#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "cpcr/error.hpp"

namespace fs = std::filesystem;

namespace cpcr::cli {

void to_json(json& j, const RunConfig& c) {
  j = json{{"command", c.command},
           {"data", c.data},
           {"label_col", c.label_col},
           {"binning", c.binning},
           {"clamp", c.clamp},
           {"encoding", c.encoding},
           {"pairing", c.pairing},
           {"context", c.context},
           {"train", c.train},
           {"folds", {{"k", c.folds}, {"stratified", c.stratified}, {"seed", c.fold_seed}}},
           {"search", c.search},
           {"outer_fold", c.outer_fold},
           {"cases", c.cases},
           {"cells", c.cells},
           {"block", c.block},
           {"class", c.class_index},
           {"synth", {{"dim", c.synth.dim}, {"n_per_class", c.synth.n_per_class}, {"noise", c.synth.noise}, {"seed", c.synth_seed}}},
           {"image", c.image},
           {"sidecar", c.sidecar},
           {"out", c.out},
           {"jobs", c.jobs}};
}

void from_json(const json& j, RunConfig& c) {
  RunConfig d;
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  take("command", d.command);
  take("data", d.data);
  take("label_col", d.label_col);
  take("binning", d.binning);
  take("clamp", d.clamp);
  take("encoding", d.encoding);
  take("pairing", d.pairing);
  take("context", d.context);
  take("train", d.train);
  if (j.contains("folds")) {
    const auto& f = j.at("folds");
    if (f.contains("k")) f.at("k").get_to(d.folds);
    if (f.contains("stratified")) f.at("stratified").get_to(d.stratified);
    if (f.contains("seed")) f.at("seed").get_to(d.fold_seed);
  }
  take("search", d.search);
  take("outer_fold", d.outer_fold);
  take("cases", d.cases);
  take("cells", d.cells);
  take("block", d.block);
  take("class", d.class_index);
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    if (s.contains("dim")) s.at("dim").get_to(d.synth.dim);
    if (s.contains("n_per_class")) s.at("n_per_class").get_to(d.synth.n_per_class);
    if (s.contains("noise")) s.at("noise").get_to(d.synth.noise);
    if (s.contains("seed")) s.at("seed").get_to(d.synth_seed);
  }
  take("image", d.image);
  take("sidecar", d.sidecar);
  take("out", d.out);
  take("jobs", d.jobs);
  c = std::move(d);
}

BinningSchema make_binning(const std::string& spec, const Dataset& data, int grid, bool clamp) {
  if (spec == "uniform") return BinningSchema::uniform_from(data, grid, clamp);
  if (spec == "identity") return BinningSchema::identity(data.dims(), grid, clamp);
  if (spec.rfind("range:", 0) == 0) {
    const auto rest = spec.substr(6);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        std::size_t used_lo = 0, used_hi = 0;
        const double lo = std::stod(rest.substr(0, colon), &used_lo);
        const double hi = std::stod(rest.substr(colon + 1), &used_hi);
        if (used_lo == colon && used_hi == rest.size() - colon - 1)
          return BinningSchema::range(data.dims(), lo, hi, grid, clamp);
      } catch (const std::logic_error&) {
      }
    }
  }
  throw ConfigError("bad --binning '" + spec + "' (expected uniform, identity or range:LO:HI)");
}

namespace {

// Flag values as parsed; unset ones leave the config file (or default) alone.
struct Flags {
  std::string config;
  std::optional<std::string> data, label_col, binning, origin, collision, color, marker, mean_render, target, out, image,
      sidecar;
  std::optional<int> grid, cell_px, folds, epochs, batch, search_k, inner_folds, outer_fold, block, class_index, dim, n;
  std::optional<double> lr, momentum, noise;
  std::optional<std::uint64_t> seed, rgb_seed;
  std::optional<unsigned> jobs;
  // Only the chosen subcommand parses, so a non-empty list means it was given.
  std::vector<int> pairing, schedule, cells;
  std::vector<std::size_t> cases;
  bool context = false, stratified = false, no_clamp = false;
};

void add_base(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration; flags override it");
  app->add_option("--out", f.out, "output directory");
}

void add_data(CLI::App* app, Flags& f) {
  app->add_option("--data", f.data, "CSV file with one case per row");
  app->add_option("--label-col", f.label_col, "label column name or 0-based index (default: last)");
  app->add_option("--binning", f.binning, "uniform | identity | range:LO:HI");
  app->add_flag("--no-clamp", f.no_clamp, "reject values outside the binning range instead of clamping");
}

void add_encoding(CLI::App* app, Flags& f) {
  app->add_option("--grid", f.grid, "grid resolution G");
  app->add_option("--cell-px", f.cell_px, "pixels per grid cell side");
  app->add_option("--origin", f.origin, "ulc | llc");
  app->add_option("--collision", f.collision, "overwrite | cross | spiral | strip | darkest");
  app->add_option("--color", f.color, "gray | red | rgb");
  app->add_option("--marker", f.marker, "cell | plus");
  app->add_option("--rgb-seed", f.rgb_seed, "palette seed for --color rgb");
  app->add_option("--pairing", f.pairing, "attribute order, 0-based, comma separated")->delimiter(',');
  app->add_option("--schedule", f.schedule, "gray levels per pair, ascending")->delimiter(',');
  app->add_flag("--context", f.context, "overlay cases on class means (double images)");
  app->add_option("--mean-render", f.mean_render, "own | gray");
}

void add_training(CLI::App* app, Flags& f) {
  app->add_option("--folds", f.folds, "number of cross-validation folds");
  app->add_flag("--stratified", f.stratified, "stratify folds by class");
  app->add_option("--epochs", f.epochs, "training epochs");
  app->add_option("--batch", f.batch, "mini-batch size");
  app->add_option("--lr", f.lr, "learning rate");
  app->add_option("--momentum", f.momentum, "momentum");
}

void add_seed_jobs(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.seed, "seed for folds, initialisation, training and search");
  app->add_option("--jobs", f.jobs, "worker threads (default: available parallelism)");
}

template <typename T, typename U>
void set_if(const std::optional<T>& flag, U& field) {
  if (flag) field = static_cast<U>(*flag);
}

RunConfig resolve(const std::string& command, const Flags& f) {
  RunConfig c;
  c.jobs = std::max(1u, std::thread::hardware_concurrency());
  if (!f.config.empty()) {
    const json j = read_json(f.config);
    const unsigned jobs = c.jobs;
    c = j.get<RunConfig>();
    if (!j.contains("jobs")) c.jobs = jobs;
    if (!c.command.empty() && c.command != command)
      throw ConfigError("--config was written by '" + c.command + "', not '" + command + "'");
  }
  c.command = command;
  set_if(f.data, c.data);
  set_if(f.label_col, c.label_col);
  set_if(f.binning, c.binning);
  if (f.no_clamp) c.clamp = false;
  set_if(f.grid, c.encoding.grid);
  set_if(f.cell_px, c.encoding.cell_px);
  if (f.origin) c.encoding.origin = parse_origin(*f.origin);
  if (f.collision) c.encoding.collision = parse_collision(*f.collision);
  if (f.color) c.encoding.color = parse_color(*f.color);
  if (f.marker) c.encoding.marker = parse_marker(*f.marker);
  set_if(f.rgb_seed, c.encoding.rgb_seed);
  if (!f.pairing.empty()) c.pairing.order = f.pairing;
  if (!f.schedule.empty()) c.encoding.schedule.levels = f.schedule;
  if (f.context) c.context.enabled = true;
  if (f.mean_render) c.context.render = parse_mean_render(*f.mean_render);
  set_if(f.folds, c.folds);
  if (f.stratified) c.stratified = true;
  set_if(f.epochs, c.train.epochs);
  set_if(f.batch, c.train.batch_size);
  set_if(f.lr, c.train.learning_rate);
  set_if(f.momentum, c.train.momentum);
  if (f.seed) {
    c.fold_seed = *f.seed;
    c.train.seed = *f.seed;
    c.search.seed = *f.seed;
    c.synth_seed = *f.seed;
  }
  set_if(f.jobs, c.jobs);
  set_if(f.search_k, c.search.k);
  if (f.target) c.search.target = parse_search_target(*f.target);
  set_if(f.inner_folds, c.search.inner_folds);
  set_if(f.outer_fold, c.outer_fold);
  if (!f.cases.empty()) c.cases = f.cases;
  if (!f.cells.empty()) c.cells = f.cells;
  set_if(f.block, c.block);
  set_if(f.class_index, c.class_index);
  set_if(f.dim, c.synth.dim);
  set_if(f.n, c.synth.n_per_class);
  set_if(f.noise, c.synth.noise);
  set_if(f.image, c.image);
  set_if(f.sidecar, c.sidecar);
  set_if(f.out, c.out);

  c.search.train = c.train;
  c.search.context = c.context;
  c.search.stratified = c.stratified;
  c.encoding.validate();
  if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");
  return c;
}

struct Loaded {
  Dataset raw;
  DiscreteDataset data;
};

Loaded load_data(RunConfig& c) {
  if (c.data.empty()) throw ConfigError("--data is required");
  CsvOptions opt;
  if (!c.label_col.empty()) {
    int index = 0;
    const auto* end = c.label_col.data() + c.label_col.size();
    const auto [ptr, ec] = std::from_chars(c.label_col.data(), end, index);
    if (ec == std::errc() && ptr == end)
      opt.label_column = index;
    else
      opt.label_column = c.label_col;
  }
  Loaded l;
  l.raw = load_csv(c.data, opt);
  l.raw.name = fs::path(c.data).stem().string();
  l.data = discretize(l.raw, make_binning(c.binning, l.raw, c.encoding.grid, c.clamp));
  if (c.pairing.order.empty()) c.pairing = Pairing::identity(l.data.dims());
  c.pairing.validate(l.data.dims());
  c.encoding.resolved_schedule(l.data.dims() / 2);
  return l;
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path out(c.out);
  fs::create_directories(out);
  write_json(c, (out / "run_config.json").string());
  return out;
}

void check_folds(const RunConfig& c) {
  if (c.folds < 2) throw ConfigError("--folds must be at least 2");
  c.train.validate();
}

std::string case_stem(const std::string& dataset, std::size_t id) { return dataset + "_" + std::to_string(id); }

int cmd_encode(RunConfig& c, std::ostream& out, std::ostream& err) {
  Loaded l = load_data(c);
  const fs::path dir = prepare_out(c);
  std::vector<std::size_t> chosen = c.cases;
  if (chosen.empty())
    for (std::size_t i = 0; i < l.data.size(); ++i) chosen.push_back(i);

  std::vector<CpcrImage> images;
  images.reserve(l.data.size());
  for (const auto& p : l.data.points) {
    const CellPlacement pl = place_pairs(pair_split(p, c.pairing), c.encoding);
    for (const auto& w : pl.warnings) err << "warning: case " << p.case_id << ": " << w << '\n';
    CpcrImage img = render(pl, c.encoding);
    img.case_id = p.case_id;
    img.label = p.label;
    images.push_back(std::move(img));
  }

  std::vector<MeanImage> means;
  if (c.context.enabled) {
    means = class_means(images, l.data.class_count());
    for (const auto& m : means) {
      const std::string stem = (dir / ("mean_" + std::to_string(m.label))).string();
      save_mean(m, stem);
      write_png(m.to_raster(), stem + ".png");
    }
  }

  json manifest = json::array();
  for (auto id : chosen) {
    if (id >= images.size()) throw DataError("case " + std::to_string(id) + " does not exist");
    const auto& img = images[id];
    const std::string stem = case_stem(l.raw.name, id);
    write_png(img.raster, (dir / (stem + ".png")).string());
    json side{{"dataset", l.raw.name},
              {"case_id", id},
              {"label", img.label},
              {"class", l.data.class_names.at(static_cast<std::size_t>(img.label))},
              {"values", l.data.points[id].values},
              {"pairing", c.pairing},
              {"encoding", c.encoding}};
    if (c.context.enabled) {
      write_png(context_image(img.raster, means, c.context.render), (dir / (stem + "_ctx.png")).string());
      side["context"] = c.context;
    }
    write_json(side, (dir / (stem + ".json")).string());
    manifest.push_back({{"case_id", id}, {"label", img.label}, {"image", stem + ".png"}});
  }
  write_json(manifest, (dir / "manifest.json").string());
  out << "encoded " << chosen.size() << " cases into " << dir.string() << '\n';
  return kOk;
}

int cmd_synth(RunConfig& c, std::ostream& out, std::ostream&) {
  SwissRollOptions o;
  o.dim = c.synth.dim;
  o.n_per_class = c.synth.n_per_class;
  o.noise = c.synth.noise;
  o.seed = c.synth_seed;
  const Dataset d = gen_swiss_roll(o);
  const fs::path dir = prepare_out(c);
  const auto path = dir / ("swiss_roll_" + std::to_string(o.dim) + "d.csv");
  write_csv(d, path.string());
  write_json(json{{"file", path.filename().string()}, {"cases", d.size()}, {"dims", d.dims()}},
             (dir / "synth_report.json").string());
  out << "wrote " << d.size() << " cases to " << path.string() << '\n';
  return kOk;
}

int cmd_cv(RunConfig& c, std::ostream& out, std::ostream& err) {
  check_folds(c);
  Loaded l = load_data(c);
  const fs::path dir = prepare_out(c);
  const FoldPlan plan = make_folds(l.data, c.folds, c.stratified, c.fold_seed);
  const CvReport r = cross_validate(l.data, c.pairing, c.encoding, c.context, plan, c.train, c.jobs);
  write_json(r, (dir / "cv_report.json").string());
  err << "cross-validation took " << r.wall_seconds << " s\n";
  out << "mean accuracy " << r.mean_accuracy << " over " << r.folds << " folds\n";
  return kOk;
}

int cmd_optimize(RunConfig& c, std::ostream& out, std::ostream& err) {
  check_folds(c);
  Loaded l = load_data(c);
  if (c.outer_fold < 1 || c.outer_fold > c.folds) throw ConfigError("--outer-fold must be in 1..--folds");
  const fs::path dir = prepare_out(c);
  const int fold = c.outer_fold - 1;
  const FoldPlan outer = make_folds(l.data, c.folds, c.stratified, c.fold_seed);
  const DiscreteDataset training = subset(l.data, outer.training_indices(fold));
  check_no_leakage(training, l.data, outer, fold);

  EncodingConfig tmpl = c.encoding;
  tmpl.schedule = {};
  const SearchTrace trace = random_search(training, c.search, tmpl, c.jobs);

  // Held-out check: retrain the baseline and the winner on the whole outer
  // training part and score the untouched validation fold.
  auto held_out = [&](const SearchCandidate& cand) {
    EncodingConfig cfg = tmpl;
    cfg.schedule = cand.schedule;
    const auto encoded = encode_all(l.data, cand.pairing, cfg);
    const FoldImages f = prepare_fold(l.data, encoded, c.context, outer, fold);
    const Eigen::MatrixXd x = stack_inputs(f.train, c.train.input_divisor);
    MlpModel m = fold_model(static_cast<int>(x.cols()), static_cast<int>(l.data.class_count()), c.train, fold);
    m = train(std::move(m), x, f.train_labels, fold_train_config(c.train, fold)).model;
    return accuracy(m, stack_inputs(f.validation, c.train.input_divisor), f.validation_labels);
  };
  json report = trace;
  report["outer_fold"] = c.outer_fold;
  report["training_cases"] = training.size();
  report["baseline_validation_accuracy"] = held_out(trace.candidates.front());
  report["best_validation_accuracy"] = held_out(trace.best_candidate());
  write_json(report, (dir / "search_trace.json").string());
  write_json(json{{"encoding", best_config(tmpl, trace)}, {"pairing", trace.best_candidate().pairing}},
             (dir / "best_config.json").string());
  err << "searched " << trace.candidates.size() << " candidates\n";
  out << "best candidate " << trace.best << " inner accuracy " << trace.best_candidate().accuracy << " (baseline "
      << trace.candidates.front().accuracy << ")\n";
  return kOk;
}

int cmd_icc(RunConfig& c, std::ostream& out, std::ostream&) {
  check_folds(c);
  Loaded l = load_data(c);
  const fs::path dir = prepare_out(c);
  const FoldPlan plan = make_folds(l.data, c.folds, c.stratified, c.fold_seed);
  const IccReport r = icc_rank(l.data, c.pairing, c.encoding, c.context, plan, c.train, c.block, c.jobs);
  write_json(r, (dir / "icc_report.json").string());
  const std::string table = icc_table(r);
  write_text(table, (dir / "icc_table.txt").string());
  out << table;
  return kOk;
}

int cmd_freq(RunConfig& c, std::ostream& out, std::ostream&) {
  Loaded l = load_data(c);
  const fs::path dir = prepare_out(c);
  const auto cells = icc_cells(c.encoding.grid, c.block, c.encoding.origin);
  std::vector<int> ids = c.cells;
  if (ids.empty())
    for (const auto& cell : cells) ids.push_back(cell.id);
  json tables = json::array();
  std::string text;
  for (int id : ids) {
    if (id < 1 || static_cast<std::size_t>(id) > cells.size())
      throw ConfigError("cell " + std::to_string(id) + " outside 1.." + std::to_string(cells.size()));
    const FrequencyTable t = pair_frequency(l.data, c.pairing, cells[static_cast<std::size_t>(id - 1)]);
    tables.push_back(t);
    text += "Cell " + std::to_string(id) + "\n" + frequency_table_text(t) + "\n";
  }
  write_json(tables, (dir / "frequency.json").string());
  write_text(text, (dir / "frequency.txt").string());
  out << text;
  return kOk;
}

int cmd_saliency(RunConfig& c, std::ostream& out, std::ostream&) {
  c.train.validate();
  Loaded l = load_data(c);
  const fs::path dir = prepare_out(c);
  auto encoded = encode_all(l.data, c.pairing, c.encoding);
  std::vector<MeanImage> means;
  if (c.context.enabled) means = class_means(encoded, l.data.class_count());
  std::vector<Raster> inputs;
  std::vector<int> labels;
  for (const auto& img : encoded) {
    inputs.push_back(c.context.enabled ? context_image(img.raster, means, c.context.render) : img.raster);
    labels.push_back(img.label);
  }
  const Eigen::MatrixXd x = stack_inputs(inputs, c.train.input_divisor);
  MlpModel m = fold_model(static_cast<int>(x.cols()), static_cast<int>(l.data.class_count()), c.train, 0);
  const TrainResult trained = train(std::move(m), x, labels, fold_train_config(c.train, 0));
  save_model(trained.model, (dir / "model.bin").string());

  std::vector<std::size_t> chosen = c.cases;
  if (chosen.empty()) {
    for (int cls = 0; cls < static_cast<int>(l.data.class_count()); ++cls) {
      const auto it = std::find(labels.begin(), labels.end(), cls);
      if (it != labels.end()) chosen.push_back(static_cast<std::size_t>(it - labels.begin()));
    }
  }
  if (c.class_index >= static_cast<int>(l.data.class_count()))
    throw ConfigError("--class must be below the class count");
  json maps = json::array();
  for (auto id : chosen) {
    if (id >= inputs.size()) throw DataError("case " + std::to_string(id) + " does not exist");
    const auto fw = forward(trained.model, image_input(inputs[id], c.train.input_divisor));
    Eigen::Index predicted = 0;
    for (Eigen::Index k = 1; k < fw.scores.size(); ++k)
      if (fw.scores(k) > fw.scores(predicted)) predicted = k;
    const int cls = c.class_index >= 0 ? c.class_index : static_cast<int>(predicted);
    const SaliencyMap s = saliency(trained.model, inputs[id], cls, c.train.input_divisor);
    const std::string stem = case_stem(l.raw.name, id);
    const std::string map_name = stem + "_saliency_c" + std::to_string(cls) + ".png";
    write_png(inputs[id], (dir / (stem + ".png")).string());
    write_png(s.to_raster(), (dir / map_name).string());
    std::vector<double> probs(fw.probabilities.data(), fw.probabilities.data() + fw.probabilities.size());
    maps.push_back({{"case_id", id},
                    {"label", labels[id]},
                    {"predicted", predicted},
                    {"class", cls},
                    {"probabilities", probs},
                    {"max_abs_gradient", s.gradient.cwiseAbs().maxCoeff()},
                    {"map", map_name}});
  }
  write_json(json{{"history", trained.history}, {"maps", maps}}, (dir / "saliency.json").string());
  out << "wrote " << chosen.size() << " saliency maps to " << dir.string() << '\n';
  return kOk;
}

int cmd_decode(RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.image.empty()) throw ConfigError("--image is required");
  if (c.sidecar.empty()) c.sidecar = fs::path(c.image).replace_extension(".json").string();
  const json side = read_json(c.sidecar);
  const EncodingConfig cfg = side.at("encoding").get<EncodingConfig>();
  const Pairing pairing = side.at("pairing").get<Pairing>();
  CpcrImage img;
  img.raster = read_image(c.image);
  img.config = cfg;
  const fs::path dir = prepare_out(c);
  DiscretePoint p = decode(img, pairing, cfg);
  if (side.contains("case_id")) p.case_id = side.at("case_id").get<std::size_t>();
  if (side.contains("label")) p.label = side.at("label").get<int>();
  json report{{"point", p}};
  if (side.contains("values")) report["matches_sidecar"] = side.at("values").get<std::vector<int>>() == p.values;
  write_json(report, (dir / "decoded.json").string());
  for (std::size_t i = 0; i < p.values.size(); ++i) out << (i ? "," : "") << p.values[i];
  out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Encode tabular records as CPC-R images, train and analyse classifiers on them", "cpcr"};
  app.require_subcommand(1);
  Flags f;

  auto* encode = app.add_subcommand("encode", "write one PNG and JSON sidecar per case");
  add_base(encode, f);
  add_data(encode, f);
  add_encoding(encode, f);
  encode->add_option("--cases", f.cases, "0-based case ids (default: all)")->delimiter(',');

  auto* synth = app.add_subcommand("synth", "generate a Swiss-roll dataset as CSV");
  add_base(synth, f);
  synth->add_option("--dim", f.dim, "2 or 3");
  synth->add_option("--n", f.n, "cases per class");
  synth->add_option("--noise", f.noise, "Gaussian noise standard deviation");
  synth->add_option("--seed", f.seed, "generator seed");

  auto* cv = app.add_subcommand("cv", "cross-validate the built-in classifier");
  for (auto* sub : {cv}) {
    add_base(sub, f);
    add_data(sub, f);
    add_encoding(sub, f);
    add_training(sub, f);
    add_seed_jobs(sub, f);
  }

  auto* optimize = app.add_subcommand("optimize", "random search over pairings and gray levels");
  add_base(optimize, f);
  add_data(optimize, f);
  add_encoding(optimize, f);
  add_training(optimize, f);
  add_seed_jobs(optimize, f);
  optimize->add_option("--search-k", f.search_k, "number of random candidates");
  optimize->add_option("--search-target", f.target, "pairing | intensities | both");
  optimize->add_option("--inner-folds", f.inner_folds, "folds of the inner cross-validation");
  optimize->add_option("--outer-fold", f.outer_fold, "1-based outer fold held out from the search");

  auto* icc = app.add_subcommand("icc", "rank covering cells by accuracy drop");
  add_base(icc, f);
  add_data(icc, f);
  add_encoding(icc, f);
  add_training(icc, f);
  add_seed_jobs(icc, f);
  icc->add_option("--block", f.block, "covering block side in grid cells");

  auto* freq = app.add_subcommand("freq", "count attribute pairs landing in covering cells");
  add_base(freq, f);
  add_data(freq, f);
  add_encoding(freq, f);
  freq->add_option("--block", f.block, "covering block side in grid cells");
  freq->add_option("--cells", f.cells, "cell ids (default: all)")->delimiter(',');

  auto* sal = app.add_subcommand("saliency", "train on all cases and write gradient maps");
  add_base(sal, f);
  add_data(sal, f);
  add_encoding(sal, f);
  add_training(sal, f);
  add_seed_jobs(sal, f);
  sal->add_option("--cases", f.cases, "0-based case ids (default: first of each class)")->delimiter(',');
  sal->add_option("--class", f.class_index, "class score to differentiate (default: predicted)");

  auto* dec = app.add_subcommand("decode", "recover a point from an image and its sidecar");
  add_base(dec, f);
  dec->add_option("--image", f.image, "PNG/PGM/PPM image");
  dec->add_option("--sidecar", f.sidecar, "JSON sidecar (default: image name with .json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig c = resolve(command, f);
    if (command == "encode") return cmd_encode(c, out, err);
    if (command == "synth") return cmd_synth(c, out, err);
    if (command == "cv") return cmd_cv(c, out, err);
    if (command == "optimize") return cmd_optimize(c, out, err);
    if (command == "icc") return cmd_icc(c, out, err);
    if (command == "freq") return cmd_freq(c, out, err);
    if (command == "saliency") return cmd_saliency(c, out, err);
    if (command == "decode") return cmd_decode(c, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: bad configuration value: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const DecodeError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const TrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cpcr::cli
