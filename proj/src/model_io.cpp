#include "advpred/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

namespace advpred {
namespace {

constexpr const char* kMagic = "advpred-model";
constexpr int kVersion = 1;

std::string base_token(BaseMetric b) {
  switch (b) {
    case BaseMetric::ZeroOne: return "zero-one";
    case BaseMetric::OrdinalAbsolute: return "ordinal-abs";
    case BaseMetric::OrdinalSquared: return "ordinal-sq";
  }
  return "?";
}

BaseMetric parse_base(const std::string& t) {
  if (t == "zero-one") return BaseMetric::ZeroOne;
  if (t == "ordinal-abs") return BaseMetric::OrdinalAbsolute;
  if (t == "ordinal-sq") return BaseMetric::OrdinalSquared;
  throw Error(ErrorCode::ParseError, "unknown base metric '" + t + "'");
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw Error(ErrorCode::ParseError, "unexpected end of model file");
    return w;
  }
  void expect(const std::string& key) {
    const std::string w = word();
    if (w != key) throw Error(ErrorCode::ParseError, "expected '" + key + "' but found '" + w + "'");
  }
  double number() { return parse_double(word()); }
  std::size_t count() {
    const std::string w = word();
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) throw Error(ErrorCode::ParseError, "bad count '" + w + "'");
    return v;
  }
  Vector numbers(std::size_t n) {
    Vector v(n);
    for (double& x : v) x = number();
    return v;
  }

 private:
  std::istream& in_;
};

void write_numbers(std::ostream& out, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_double(v[i]);
  out << "\n";
}

void write_spec(std::ostream& out, const LossSpec& spec) {
  out << "loss ";
  if (std::holds_alternative<ZeroOne>(spec)) {
    out << "zero-one\n";
  } else if (std::holds_alternative<OrdinalAbsolute>(spec)) {
    out << "ordinal-abs\n";
  } else if (std::holds_alternative<OrdinalSquared>(spec)) {
    out << "ordinal-sq\n";
  } else if (const auto* a = std::get_if<Abstain>(&spec)) {
    out << "abstain " << format_double(a->alpha) << "\n";
  } else if (const auto* w = std::get_if<Weighted>(&spec)) {
    out << "weighted " << base_token(w->base) << " " << format_double(w->alpha) << "\n";
  } else {
    const LossMatrix& m = std::get<General>(spec).matrix;
    out << "general " << m.options() << " " << m.classes() << "\n";
    for (std::size_t r = 0; r < m.options(); ++r) write_numbers(out, m.entries().row(r));
  }
}

LossSpec read_spec(Reader& r) {
  r.expect("loss");
  const std::string kind = r.word();
  if (kind == "zero-one") return ZeroOne{};
  if (kind == "ordinal-abs") return OrdinalAbsolute{};
  if (kind == "ordinal-sq") return OrdinalSquared{};
  if (kind == "abstain") return Abstain{r.number()};
  if (kind == "weighted") {
    const BaseMetric b = parse_base(r.word());
    return Weighted{b, r.number()};
  }
  if (kind == "general") {
    const std::size_t l = r.count();
    const std::size_t k = r.count();
    Matrix m(l, k);
    for (double& v : m.data()) v = r.number();
    return General{LossMatrix(std::move(m))};
  }
  throw Error(ErrorCode::ParseError, "unknown loss '" + kind + "'");
}

void write_map(std::ostream& out, const FeatureMap& map) {
  out << "features " << (map.kind() == FeatureKind::Thresholded ? "thresholded" : "multiclass") << " "
      << map.input_dim() << " " << map.classes() << "\n";
}

FeatureMap read_map(Reader& r) {
  r.expect("features");
  const std::string kind = r.word();
  const std::size_t m = r.count();
  const std::size_t k = r.count();
  if (kind == "thresholded") return FeatureMap::thresholded(m, k);
  if (kind == "multiclass") return FeatureMap::multiclass(m, k);
  throw Error(ErrorCode::ParseError, "unknown feature map '" + kind + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  if (ec != std::errc()) throw Error(ErrorCode::ParseError, "cannot format number");
  return std::string(buf, ptr);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  bool negative = false;
  if (first != last && *first == '-') {
    negative = true;
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::hex);
  if (ec != std::errc() || ptr != last) throw Error(ErrorCode::ParseError, "bad number '" + token + "'");
  return negative ? -v : v;
}

void write_model(std::ostream& out, const SavedModel& saved) {
  out << kMagic << " " << kVersion << "\n";
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        out << "type " << (std::is_same_v<T, LinearModel> ? "linear" : "kernel") << "\n";
        write_spec(out, m.spec);
        write_map(out, m.map);
        out << "lambda " << format_double(m.lambda) << "\n";
        if constexpr (std::is_same_v<T, LinearModel>) {
          out << "theta " << m.theta.size() << "\n";
          write_numbers(out, m.theta);
        } else {
          if (const auto* g = std::get_if<GaussianKernel>(&m.kernel))
            out << "kernel gaussian " << format_double(g->gamma) << "\n";
          else
            out << "kernel linear\n";
          out << "t_final " << m.t_final << "\n";
          const Dataset& d = *m.train;
          out << "train " << d.size() << " " << d.features() << " " << d.classes << " " << m.train_digest << "\n";
          for (std::size_t i = 0; i < d.size(); ++i) {
            out << d.y[i] << " ";
            write_numbers(out, d.row(i));
          }
          out << "alpha " << m.alpha.rows() << " " << m.alpha.cols() << "\n";
          for (std::size_t i = 0; i < m.alpha.rows(); ++i) write_numbers(out, m.alpha.row(i));
        }
      },
      saved.model);
  if (saved.scaler) {
    out << "scaler " << saved.scaler->mean.size() << " " << (saved.scaler->intercept ? "intercept" : "plain") << "\n";
    write_numbers(out, saved.scaler->mean);
    write_numbers(out, saved.scaler->scale);
  } else {
    out << "scaler none\n";
  }
  out << "end\n";
}

SavedModel read_model(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  if (r.count() != static_cast<std::size_t>(kVersion)) throw Error(ErrorCode::ParseError, "unsupported model version");
  r.expect("type");
  const std::string type = r.word();
  LossSpec spec = read_spec(r);
  validate(spec);
  FeatureMap map = read_map(r);
  r.expect("lambda");
  const double lambda = r.number();

  SavedModel saved;
  if (type == "linear") {
    r.expect("theta");
    LinearModel m{r.numbers(r.count()), map, spec, lambda};
    if (m.theta.size() != map.output_dim()) throw Error(ErrorCode::ParseError, "theta length does not match features");
    saved.model = std::move(m);
  } else if (type == "kernel") {
    KernelModel m;
    m.spec = spec;
    m.map = map;
    m.lambda = lambda;
    r.expect("kernel");
    const std::string kind = r.word();
    if (kind == "gaussian")
      m.kernel = GaussianKernel{r.number()};
    else if (kind == "linear")
      m.kernel = LinearKernel{};
    else
      throw Error(ErrorCode::ParseError, "unknown kernel '" + kind + "'");
    r.expect("t_final");
    m.t_final = r.count();
    r.expect("train");
    auto d = std::make_shared<Dataset>();
    const std::size_t n = r.count();
    const std::size_t features = r.count();
    d->classes = r.count();
    const std::string stored = r.word();
    d->x = Matrix(n, features);
    d->y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      d->y[i] = static_cast<Label>(r.count());
      for (double& v : d->x.row(i)) v = r.number();
    }
    d->check();
    m.train_digest = digest(*d);
    if (std::to_string(m.train_digest) != stored)
      throw Error(ErrorCode::ParseError, "training-set digest mismatch");
    r.expect("alpha");
    const std::size_t rows = r.count();
    const std::size_t cols = r.count();
    if (rows != n || cols != map.classes()) throw Error(ErrorCode::ParseError, "alpha shape does not match");
    m.alpha = Matrix(rows, cols);
    for (double& v : m.alpha.data()) v = r.number();
    m.train = std::move(d);
    saved.model = std::move(m);
  } else {
    throw Error(ErrorCode::ParseError, "unknown model type '" + type + "'");
  }

  r.expect("scaler");
  const std::string s = r.word();
  if (s != "none") {
    std::size_t m = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), m);
    if (ec != std::errc()) throw Error(ErrorCode::ParseError, "bad scaler width");
    Scaler sc;
    const std::string mode = r.word();
    if (mode != "intercept" && mode != "plain") throw Error(ErrorCode::ParseError, "bad scaler mode '" + mode + "'");
    sc.intercept = mode == "intercept";
    sc.mean = r.numbers(m);
    sc.scale = r.numbers(m);
    saved.scaler = std::move(sc);
  }
  r.expect("end");
  return saved;
}

void save_model(const std::string& path, const SavedModel& saved) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot open '" + path + "' for writing");
  write_model(out, saved);
  if (!out) throw Error(ErrorCode::ParseError, "write to '" + path + "' failed");
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_model(in);
}

}  // namespace advpred
