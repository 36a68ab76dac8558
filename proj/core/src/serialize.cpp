#include "cpcr/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cpcr/error.hpp"

namespace cpcr {

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& is, const std::string& path) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw DataError(path + ": file is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw DataError("cannot write " + path);
  return os;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw DataError("cannot read " + path);
  return is;
}

}  // namespace

void to_json(json& j, const Pairing& p) { j = p.order; }
void from_json(const json& j, Pairing& p) { p.order = j.get<std::vector<int>>(); }
void to_json(json& j, const IntensitySchedule& s) { j = s.levels; }
void from_json(const json& j, IntensitySchedule& s) { s.levels = j.get<std::vector<int>>(); }

void to_json(json& j, const EncodingConfig& c) {
  std::vector<std::string> cross;
  for (auto d : c.cross_order) cross.push_back(to_string(d));
  j = json{{"grid", c.grid},
           {"origin", to_string(c.origin)},
           {"cell_px", c.cell_px},
           {"collision", to_string(c.collision)},
           {"schedule", c.schedule},
           {"color", to_string(c.color)},
           {"marker", to_string(c.marker)},
           {"rgb_seed", c.rgb_seed},
           {"cross_order", cross}};
}

void from_json(const json& j, EncodingConfig& c) {
  EncodingConfig d;
  d.grid = get_or(j, "grid", d.grid);
  if (j.contains("origin")) d.origin = parse_origin(j.at("origin").get<std::string>());
  d.cell_px = get_or(j, "cell_px", d.cell_px);
  if (j.contains("collision")) d.collision = parse_collision(j.at("collision").get<std::string>());
  if (j.contains("schedule")) d.schedule = j.at("schedule").get<IntensitySchedule>();
  if (j.contains("color")) d.color = parse_color(j.at("color").get<std::string>());
  if (j.contains("marker")) d.marker = parse_marker(j.at("marker").get<std::string>());
  d.rgb_seed = get_or(j, "rgb_seed", d.rgb_seed);
  if (j.contains("cross_order")) {
    d.cross_order.clear();
    for (const auto& s : j.at("cross_order")) d.cross_order.push_back(parse_direction(s.get<std::string>()));
  }
  d.validate();
  c = std::move(d);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},     {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
           {"momentum", c.momentum}, {"seed", c.seed},             {"input_divisor", c.input_divisor}};
}

void from_json(const json& j, TrainConfig& c) {
  TrainConfig d;
  d.epochs = get_or(j, "epochs", d.epochs);
  d.batch_size = get_or(j, "batch_size", d.batch_size);
  d.learning_rate = get_or(j, "learning_rate", d.learning_rate);
  d.momentum = get_or(j, "momentum", d.momentum);
  d.seed = get_or(j, "seed", d.seed);
  d.input_divisor = get_or(j, "input_divisor", d.input_divisor);
  c = d;
}

void to_json(json& j, const ContextOptions& c) { j = json{{"enabled", c.enabled}, {"render", to_string(c.render)}}; }

void from_json(const json& j, ContextOptions& c) {
  ContextOptions d;
  d.enabled = get_or(j, "enabled", d.enabled);
  if (j.contains("render")) d.render = parse_mean_render(j.at("render").get<std::string>());
  c = d;
}

void to_json(json& j, const SearchSpec& s) {
  j = json{{"k", s.k},
           {"seed", s.seed},
           {"target", to_string(s.target)},
           {"inner_folds", s.inner_folds},
           {"stratified", s.stratified},
           {"train", s.train},
           {"context", s.context}};
}

void from_json(const json& j, SearchSpec& s) {
  SearchSpec d;
  d.k = get_or(j, "k", d.k);
  d.seed = get_or(j, "seed", d.seed);
  if (j.contains("target")) d.target = parse_search_target(j.at("target").get<std::string>());
  d.inner_folds = get_or(j, "inner_folds", d.inner_folds);
  d.stratified = get_or(j, "stratified", d.stratified);
  if (j.contains("train")) d.train = j.at("train").get<TrainConfig>();
  if (j.contains("context")) d.context = j.at("context").get<ContextOptions>();
  s = d;
}

void to_json(json& j, const SearchCandidate& c) {
  j = json{{"pairing", c.pairing}, {"schedule", c.schedule}, {"fold_accuracies", c.fold_accuracies}, {"accuracy", c.accuracy}};
}

void from_json(const json& j, SearchCandidate& c) {
  c.pairing = j.at("pairing").get<Pairing>();
  c.schedule = j.at("schedule").get<IntensitySchedule>();
  c.fold_accuracies = j.at("fold_accuracies").get<std::vector<double>>();
  c.accuracy = j.at("accuracy").get<double>();
}

void to_json(json& j, const SearchTrace& t) { j = json{{"candidates", t.candidates}, {"best", t.best}}; }

void from_json(const json& j, SearchTrace& t) {
  t.candidates = j.at("candidates").get<std::vector<SearchCandidate>>();
  t.best = j.at("best").get<std::size_t>();
}

void to_json(json& j, const FoldPlan& p) {
  j = json{{"k", p.k}, {"stratified", p.stratified}, {"seed", p.seed}, {"assignments", p.assignments}};
}

void to_json(json& j, const CvReport& r) {
  j = json{{"fold_accuracies", r.fold_accuracies},
           {"mean_accuracy", r.mean_accuracy},
           {"train_sizes", r.train_sizes},
           {"validation_sizes", r.validation_sizes},
           {"folds", {{"k", r.folds}, {"stratified", r.stratified}, {"seed", r.fold_seed}}},
           {"encoding", r.encoding},
           {"pairing", r.pairing},
           {"context", r.context},
           {"train", r.train},
           {"folds_disjoint", r.folds_disjoint},
           {"means_fold_local", r.means_fold_local}};
}

void to_json(json& j, const IccCell& c) {
  json coords = json::array();
  for (const auto& g : c.coords) coords.push_back({g.x, g.y});
  j = json{{"id", c.id}, {"column", c.column}, {"row", c.row}, {"coords", coords}};
}

void to_json(json& j, const IccReport& r) {
  json cells = json::array();
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    json c = r.cells[i];
    c["covered_accuracy"] = r.mean_covered[i];
    c["fold_accuracies"] = r.covered[i];
    cells.push_back(std::move(c));
  }
  j = json{{"block", r.block},
           {"baseline", r.baseline},
           {"baseline_folds", r.baseline_folds},
           {"cells", cells},
           {"ranking", r.ranking},
           {"most_informative", r.most_informative}};
}

void to_json(json& j, const FrequencyTable& t) {
  json cols = json::array();
  for (const auto& [a, b] : t.columns) cols.push_back({a, b});
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"pair", {r.first + 1, r.second + 1}}, {"counts", r.counts}, {"total", r.total}});
  j = json{{"cell", t.cell.id}, {"columns", cols}, {"rows", rows}, {"case_count", t.case_count}};
}

void to_json(json& j, const DiscretePoint& p) {
  j = json{{"values", p.values}, {"label", p.label}, {"grid", p.grid}, {"case_id", p.case_id}};
}

void to_json(json& j, const EpochStats& e) { j = json{{"loss", e.loss}, {"accuracy", e.accuracy}}; }

json read_json(const std::string& path) {
  auto is = open_in(path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

void write_text(const std::string& text, const std::string& path) {
  auto os = open_out(path);
  os << text;
}

void save_mean(const MeanImage& m, const std::string& stem) {
  write_json(json{{"width", m.width},
                  {"height", m.height},
                  {"channels", m.channels},
                  {"label", m.label},
                  {"count", m.count},
                  {"case_ids", m.case_ids}},
             stem + ".json");
  auto os = open_out(stem + ".f64", true);
  for (double v : m.pixels) put_le(os, v);
}

MeanImage load_mean(const std::string& stem) {
  const json j = read_json(stem + ".json");
  MeanImage m;
  m.width = j.at("width").get<int>();
  m.height = j.at("height").get<int>();
  m.channels = j.at("channels").get<int>();
  m.label = j.at("label").get<int>();
  m.count = j.at("count").get<std::size_t>();
  m.case_ids = j.at("case_ids").get<std::vector<std::size_t>>();
  auto is = open_in(stem + ".f64", true);
  m.pixels.resize(static_cast<std::size_t>(m.width) * m.height * m.channels);
  for (auto& v : m.pixels) v = get_le<double>(is, stem + ".f64");
  return m;
}

namespace {
constexpr char kModelMagic[8] = {'C', 'P', 'C', 'R', 'M', 'L', 'P', '1'};
}

void save_model(const MlpModel& model, const std::string& path) {
  std::vector<bool> drop = model.dropout_after;
  const json header{{"widths", model.widths},
                    {"dropout_after", drop},
                    {"dropout_rate", model.dropout_rate},
                    {"init_seed", model.init_seed},
                    {"dtype", "float32"},
                    {"layout", "row-major weights then biases, per layer"}};
  const std::string h = header.dump();
  auto os = open_out(path, true);
  os.write(kModelMagic, sizeof kModelMagic);
  put_le<std::uint64_t>(os, h.size());
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const auto& w = model.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_le(os, static_cast<float>(w(r, c)));
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) put_le(os, static_cast<float>(model.biases[l](i)));
  }
}

MlpModel load_model(const std::string& path) {
  auto is = open_in(path, true);
  char magic[sizeof kModelMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kModelMagic, sizeof magic) != 0)
    throw DataError(path + ": not a model checkpoint");
  const auto len = get_le<std::uint64_t>(is, path);
  std::string h(len, '\0');
  if (!is.read(h.data(), static_cast<std::streamsize>(len))) throw DataError(path + ": file is truncated");
  json header;
  try {
    header = json::parse(h);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": bad header: " + e.what());
  }
  MlpModel m = make_model(header.at("widths").get<std::vector<int>>(), header.at("dropout_after").get<std::vector<bool>>(),
                          header.at("dropout_rate").get<double>(), header.at("init_seed").get<std::uint64_t>());
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    auto& w = m.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = get_le<float>(is, path);
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) m.biases[l](i) = get_le<float>(is, path);
  }
  return m;
}

}  // namespace cpcr
