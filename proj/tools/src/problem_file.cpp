#include "problem_file.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "qkdrate/errors.hpp"

namespace qkdrate::cli {

ParseError::ParseError(int line, int column, const std::string& what)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string text;
  int line = 0;
  int column = 0;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      col = 1;
      ++i;
    } else if (ch == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++col;
      ++i;
    } else {
      Token t{{}, line, col};
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '#') {
        t.text += text[i++];
        ++col;
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : tokens_(tokenize(text)) {
    int line = 1, col = 1;
    for (char ch : text) {
      if (ch == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    eof_ = Token{"", line, col};
  }

  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return done() ? eof_ : tokens_[pos_]; }

  const Token& next(const char* what) {
    if (done()) throw ParseError(eof_.line, eof_.column, std::string("unexpected end of file, expected ") + what);
    return tokens_[pos_++];
  }

  void expect(const std::string& word) {
    const Token& t = next(("'" + word + "'").c_str());
    if (t.text != word) throw ParseError(t.line, t.column, "expected '" + word + "', found '" + t.text + "'");
  }

  Index count(const char* what, Index min_value = 0) {
    const Token& t = next(what);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(t.text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.text.size() || used == 0)
      throw ParseError(t.line, t.column, std::string("expected an integer ") + what + ", found '" + t.text + "'");
    if (v < min_value)
      throw ParseError(t.line, t.column, std::string(what) + " must be at least " + std::to_string(min_value));
    return Index(v);
  }

  template <typename Real>
  Real number() {
    using std::isfinite;
    const Token& t = next("a number");
    Real v{};
    bool ok = true;
    try {
      v = parse_real<Real>(t.text);
      ok = isfinite(v);
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) throw ParseError(t.line, t.column, "expected a finite number, found '" + t.text + "'");
    return v;
  }

  template <typename T>
  T entry() {
    using Real = RealOf<T>;
    if constexpr (is_complex_v<T>) {
      const Real re = number<Real>();
      const Real im = number<Real>();
      return T(re, im);
    } else {
      return number<Real>();
    }
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Token eof_;
};

FieldMode read_field(Reader& r) {
  r.expect("field");
  const Token& t = r.next("a field mode");
  if (t.text == "real") return FieldMode::real;
  if (t.text == "complex") return FieldMode::complex;
  throw ParseError(t.line, t.column, "field must be 'real' or 'complex', found '" + t.text + "'");
}

ProblemHeader header_of(Reader& r) {
  ProblemHeader h;
  const Token& magic = r.next("'qkdrate-problem'");
  if (magic.text != "qkdrate-problem")
    throw ParseError(magic.line, magic.column, "not a problem file (missing 'qkdrate-problem' tag)");
  const Token& vt = r.peek();
  h.version = int(r.count("version", 1));
  if (h.version != kProblemFileVersion)
    throw ParseError(vt.line, vt.column, "unsupported problem file version " + std::to_string(h.version));
  h.field = read_field(r);
  return h;
}

template <typename T>
KrausMap<T> read_kraus(Reader& r, const char* name, Index side) {
  r.expect(name);
  const Token& at = r.peek();
  const Index count = r.count("operator count");
  const Index rows = r.count("operator rows", count ? 1 : 0);
  const Index cols = r.count("operator columns", count ? 1 : 0);
  if (count == 0) return {};
  if (cols != side)
    throw ParseError(at.line, at.column, std::string(name) + " operators take " + std::to_string(cols) +
                                             " inputs, the cone side is " + std::to_string(side));
  std::vector<Mat<T>> ops;
  for (Index k = 0; k < count; ++k) {
    Mat<T> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = r.entry<T>();
    ops.push_back(std::move(m));
  }
  return KrausMap<T>(std::move(ops));
}

template <typename T>
void write_number(std::ostream& os, const T& v) {
  if constexpr (is_complex_v<T>) {
    os << to_string(v.real()) << ' ' << to_string(v.imag());
  } else {
    os << to_string(v);
  }
}

template <typename T>
void write_kraus(std::ostream& os, const char* name, const KrausMap<T>& map) {
  if (map.empty()) {
    os << "  " << name << " 0 0 0\n";
    return;
  }
  os << "  " << name << ' ' << map.operators().size() << ' ' << map.out_dim() << ' ' << map.in_dim() << '\n';
  for (const auto& k : map.operators()) {
    for (Index j = 0; j < k.cols(); ++j) {
      os << "   ";
      for (Index i = 0; i < k.rows(); ++i) {
        os << ' ';
        write_number(os, k(i, j));
      }
      os << '\n';
    }
  }
}

template <typename Real>
void write_row(std::ostream& os, const Eigen::Ref<const Vec<Real>>& v) {
  for (Index i = 0; i < v.size(); ++i) {
    os << (i ? " " : "") << to_string(v(i));
  }
  os << '\n';
}

}  // namespace

ProblemHeader read_header(const std::string& text) {
  Reader r(text);
  return header_of(r);
}

template <typename T>
ProblemFile<T> parse_problem(const std::string& text) {
  using Real = RealOf<T>;
  Reader r(text);
  const Token& start = r.peek();
  const ProblemHeader h = header_of(r);
  if (h.field != field_mode_of<T>())
    throw ParseError(start.line, start.column,
                     std::string("problem is ") + (h.field == FieldMode::complex ? "complex" : "real") +
                         " but a " + (is_complex_v<T> ? "complex" : "real") + " reader was requested");

  ProblemFile<T> out;
  auto& p = out.problem;
  r.expect("cones");
  const Index ncones = r.count("cone count", 1);
  for (Index k = 0; k < ncones; ++k) {
    const Token& kw = r.next("a cone keyword");
    if (kw.text == "nonneg") {
      p.cones.push_back(ConeDescriptor<T>::nonneg(r.count("cone size", 1)));
    } else if (kw.text == "second_order") {
      p.cones.push_back(ConeDescriptor<T>::second_order(r.count("cone size", 2)));
    } else if (kw.text == "rel_entropy") {
      p.cones.push_back(ConeDescriptor<T>::rel_entropy(r.count("matrix side", 1)));
    } else if (kw.text == "logdet") {
      p.cones.push_back(ConeDescriptor<T>::pure_logdet(r.count("matrix side", 1)));
    } else if (kw.text == "qkd") {
      const Index side = r.count("matrix side", 1);
      auto g = read_kraus<T>(r, "ghat", side);
      auto z = read_kraus<T>(r, "zhat", side);
      if (g.empty() && z.empty())
        p.cones.push_back(ConeDescriptor<T>::pure_logdet(side));
      else
        p.cones.push_back(ConeDescriptor<T>::qkd(std::move(g), std::move(z)));
    } else {
      throw ParseError(kw.line, kw.column, "unknown cone '" + kw.text + "'");
    }
  }

  Index nvars = 0;
  for (const auto& c : p.cones) nvars += c.dim();

  r.expect("c");
  const Token& ct = r.peek();
  const Index nc = r.count("length of c");
  if (nc != nvars)
    throw ParseError(ct.line, ct.column,
                     "c has " + std::to_string(nc) + " entries but the cones hold " + std::to_string(nvars));
  p.c = Vec<Real>(nc);
  for (Index i = 0; i < nc; ++i) p.c(i) = r.number<Real>();

  r.expect("A");
  const Index rows = r.count("row count");
  const Token& at = r.peek();
  const Index cols = r.count("column count");
  if (cols != nvars)
    throw ParseError(at.line, at.column,
                     "A has " + std::to_string(cols) + " columns but the cones hold " + std::to_string(nvars));
  p.A = Mat<Real>(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) p.A(i, j) = r.number<Real>();

  r.expect("b");
  const Token& bt = r.peek();
  const Index nb = r.count("length of b");
  if (nb != rows)
    throw ParseError(bt.line, bt.column, "b has " + std::to_string(nb) + " entries but A has " +
                                             std::to_string(rows) + " rows");
  p.b = Vec<Real>(nb);
  for (Index i = 0; i < nb; ++i) p.b(i) = r.number<Real>();

  while (r.peek().text == "meta") {
    r.next("meta");
    const Token& key = r.next("a meta key");
    const Token& value = r.next("a meta value");
    out.meta[key.text] = value.text;
  }
  r.expect("end");
  if (!r.done()) {
    const Token& t = r.peek();
    throw ParseError(t.line, t.column, "trailing content after 'end'");
  }
  try {
    p.validate();
  } catch (const DimensionError& e) {
    throw ParseError(start.line, start.column, e.what());
  }
  return out;
}

template <typename T>
std::string emit_problem(const ProblemFile<T>& file) {
  using Real = RealOf<T>;
  const auto& p = file.problem;
  std::ostringstream os;
  os << "qkdrate-problem " << kProblemFileVersion << '\n';
  os << "field " << (is_complex_v<T> ? "complex" : "real") << '\n';
  os << "cones " << p.cones.size() << '\n';
  for (const auto& c : p.cones) {
    switch (c.kind) {
      case ConeKind::nonneg: os << "nonneg " << c.size << '\n'; break;
      case ConeKind::second_order: os << "second_order " << c.size << '\n'; break;
      case ConeKind::rel_entropy: os << "rel_entropy " << c.side_dim << '\n'; break;
      case ConeKind::qkd:
        if (c.ghat.empty() && c.zhat.empty()) {
          os << "logdet " << c.side_dim << '\n';
        } else {
          os << "qkd " << c.side_dim << '\n';
          write_kraus(os, "ghat", c.ghat);
          write_kraus(os, "zhat", c.zhat);
        }
        break;
    }
  }
  os << "c " << p.c.size() << '\n';
  write_row<Real>(os, p.c);
  os << "A " << p.A.rows() << ' ' << p.A.cols() << '\n';
  for (Index i = 0; i < p.A.rows(); ++i) write_row<Real>(os, p.A.row(i).transpose());
  os << "b " << p.b.size() << '\n';
  write_row<Real>(os, p.b);
  for (const auto& [k, v] : file.meta) os << "meta " << k << ' ' << v << '\n';
  os << "end\n";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

#define QKDRATE_CLI_INSTANTIATE(T)                                \
  template ProblemFile<T> parse_problem<T>(const std::string&); \
  template std::string emit_problem<T>(const ProblemFile<T>&);
QKDRATE_CLI_INSTANTIATE(double)
QKDRATE_CLI_INSTANTIATE(std::complex<double>)
QKDRATE_CLI_INSTANTIATE(Extended)
QKDRATE_CLI_INSTANTIATE(std::complex<Extended>)
#undef QKDRATE_CLI_INSTANTIATE

}  // namespace qkdrate::cli
