#include "bigsam/problems.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

namespace bigsam {

// ---------------------------------------------------------------------------
// Least squares

double LeastSquaresInstance::lipschitz() const {
  if (A.size() == 0) throw ConfigError("least-squares instance has an empty matrix");
  Eigen::BDCSVD<Matrix> svd(A);
  const double top = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  if (!(top > 0.0)) throw ConfigError("least-squares matrix is zero; L_f would be 0");
  return 2.0 * top * top;
}

SmoothFunction LeastSquaresInstance::smooth() const {
  const Matrix a = A;
  const Vector rhs = b;
  return SmoothFunction([a, rhs](const Vector& x) { return (a * x - rhs).squaredNorm(); },
                        [a, rhs](const Vector& x) -> Vector {
                          return 2.0 * (a.transpose() * (a * x - rhs));
                        },
                        lipschitz());
}

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

double NormalStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  return u * factor;
}

namespace {

Matrix random_orthonormal(Index rows, Index cols, NormalStream& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.next();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

}  // namespace

LeastSquaresInstance generate_rank_deficient_ls(Index m, Index n, Index rank, double sv_decay,
                                                std::uint64_t seed) {
  if (m < 1 || n < 1) throw ConfigError("generator: m and n must be positive");
  if (rank < 1 || rank > std::min(m, n))
    throw ConfigError("generator: rank must lie in [1, min(m, n)]");
  if (!(sv_decay > 0.0 && sv_decay < 1.0)) throw ConfigError("generator: sv_decay must lie in (0, 1)");

  NormalStream rng(seed);
  const Matrix U = random_orthonormal(m, rank, rng);
  const Matrix V = random_orthonormal(n, rank, rng);
  Vector sv(rank);
  for (Index i = 0; i < rank; ++i) sv[i] = std::pow(sv_decay, static_cast<double>(i));

  LeastSquaresInstance inst;
  inst.A = U * sv.asDiagonal() * V.transpose();
  Vector x_true(n);
  for (Index i = 0; i < n; ++i) x_true[i] = rng.uniform();
  inst.b = inst.A * x_true;
  inst.x_true = std::move(x_true);
  inst.seed = seed;
  return inst;
}

LeastSquaresInstance add_noise(const LeastSquaresInstance& inst, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("add_noise: rho must be nonnegative");
  LeastSquaresInstance out = inst;
  if (rho == 0.0) return out;
  NormalStream rng(seed);
  for (Index i = 0; i < out.b.size(); ++i) out.b[i] += rho * rng.next();
  out.noise_sigma = rho;
  out.seed = seed;
  return out;
}

FirstDifferenceOperator::FirstDifferenceOperator(Index n) : n_(n) {
  if (n < 2) throw ConfigError("first-difference operator needs n >= 2");
}

Matrix FirstDifferenceOperator::matrix() const {
  Matrix d = Matrix::Zero(n_ - 1, n_);
  for (Index i = 0; i + 1 < n_; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d;
}

QuadraticForm quadratic_outer_from_operator(const FirstDifferenceOperator& op) {
  const Matrix d = op.matrix();
  const Index n = op.dimension();
  Matrix q(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = d.col(i).dot(d.col(j)) + (i == j ? 1.0 : 0.0);
      q(i, j) = v;
      q(j, i) = v;
    }
  }
  return QuadraticForm(std::move(q));
}

BilevelProblem make_nonneg_ls_problem(const LeastSquaresInstance& inst, OuterFunction outer) {
  const Index n = inst.A.cols();
  if (inst.b.size() != inst.A.rows()) throw ConfigError("least-squares: A and b sizes differ");
  return BilevelProblem{inst.smooth(), catalog::nonneg_indicator(), std::move(outer), n};
}

// ---------------------------------------------------------------------------
// File ingestion

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Matrix parse_matrix_market(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(name, 1, "empty file");
  ++lineno;
  const auto banner = split_ws(line);
  if (banner.size() != 5 || lower(banner[0]) != "%%matrixmarket" || lower(banner[1]) != "matrix")
    throw ParseError(name, lineno, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
  const std::string layout = lower(banner[2]);
  const std::string field = lower(banner[3]);
  const std::string symmetry = lower(banner[4]);
  if (layout != "coordinate" && layout != "array")
    throw ParseError(name, lineno, "unsupported layout '" + layout + "'");
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError(name, lineno, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
    throw ParseError(name, lineno, "unsupported symmetry '" + symmetry + "'");
  const bool symmetric = symmetry != "general";
  const double mirror_sign = symmetry == "skew-symmetric" ? -1.0 : 1.0;

  // Skip comments and blank lines up to the size line.
  auto next_data_line = [&](std::vector<std::string_view>& tokens) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty() || t.front() == '%') continue;
      tokens = split_ws(line);
      return true;
    }
    return false;
  };

  std::vector<std::string_view> tokens;
  if (!next_data_line(tokens)) throw ParseError(name, lineno + 1, "missing size line");
  auto parse_index = [&](std::string_view tok, long long& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || out < 0)
      throw ParseError(name, lineno, "invalid integer '" + std::string(tok) + "'");
  };

  long long rows = 0, cols = 0, entries = 0;
  if (layout == "coordinate") {
    if (tokens.size() != 3) throw ParseError(name, lineno, "size line must be 'rows cols nnz'");
    parse_index(tokens[0], rows);
    parse_index(tokens[1], cols);
    parse_index(tokens[2], entries);
  } else {
    if (tokens.size() != 2) throw ParseError(name, lineno, "size line must be 'rows cols'");
    parse_index(tokens[0], rows);
    parse_index(tokens[1], cols);
    entries = symmetric ? (symmetry == "skew-symmetric" ? rows * (rows - 1) / 2 : rows * (rows + 1) / 2)
                        : rows * cols;
  }
  if (symmetric && rows != cols) throw ParseError(name, lineno, "symmetric matrix must be square");

  Matrix m = Matrix::Zero(rows, cols);
  long long i = 0, j = 0;  // array layout cursor (column-major, lower triangle if symmetric)
  if (layout == "array" && symmetry == "skew-symmetric") i = 1;
  for (long long e = 0; e < entries; ++e) {
    if (!next_data_line(tokens))
      throw ParseError(name, lineno + 1,
                       "unexpected end of file: read " + std::to_string(e) + " of " +
                           std::to_string(entries) + " entries");
    double v = 0.0;
    long long r = 0, c = 0;
    if (layout == "coordinate") {
      if (tokens.size() != 3) throw ParseError(name, lineno, "entry must be 'row col value'");
      parse_index(tokens[0], r);
      parse_index(tokens[1], c);
      if (r < 1 || r > rows || c < 1 || c > cols)
        throw ParseError(name, lineno, "entry index out of range");
      --r;
      --c;
      if (!parse_double(tokens[2], v))
        throw ParseError(name, lineno, "invalid number '" + std::string(tokens[2]) + "'");
    } else {
      if (tokens.size() != 1) throw ParseError(name, lineno, "array entry must be a single value");
      if (!parse_double(tokens[0], v))
        throw ParseError(name, lineno, "invalid number '" + std::string(tokens[0]) + "'");
      r = i;
      c = j;
      ++i;
      if (i >= rows) {
        ++j;
        i = symmetric ? (symmetry == "skew-symmetric" ? j + 1 : j) : 0;
      }
    }
    m(r, c) = v;
    if (symmetric && r != c) m(c, r) = mirror_sign * v;
  }
  if (next_data_line(tokens))
    throw ParseError(name, lineno, "trailing data after " + std::to_string(entries) + " entries");
  return m;
}

Matrix parse_csv(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      double v = 0.0;
      if (!parse_double(field, v))
        throw ParseError(name, lineno, "invalid number '" + std::string(trim(field)) + "'");
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows.empty()) width = row.size();
    if (row.size() != width)
      throw ParseError(name, lineno,
                       "expected " + std::to_string(width) + " columns, found " +
                           std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(name, lineno + 1, "no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

}  // namespace

Matrix parse_matrix(std::istream& in, MatrixFormat format, const std::string& name) {
  return format == MatrixFormat::MatrixMarket ? parse_matrix_market(in, name) : parse_csv(in, name);
}

MatrixFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".mtx" || ext == ".mm") return MatrixFormat::MatrixMarket;
  if (ext == ".csv" || ext == ".txt") return MatrixFormat::Csv;
  throw ConfigError("cannot infer matrix format from extension of '" + path.string() +
                    "' (use .mtx or .csv)");
}

Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  return parse_matrix(in, format, path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  return load_matrix(path, format_from_path(path));
}

LeastSquaresInstance load_least_squares(const std::filesystem::path& matrix_path,
                                        const std::filesystem::path& rhs_path) {
  LeastSquaresInstance inst;
  inst.A = load_matrix(matrix_path);
  Matrix rhs = load_matrix(rhs_path);
  if (rhs.cols() != 1 && rhs.rows() == 1) rhs.transposeInPlace();
  if (rhs.cols() != 1)
    throw ConfigError(rhs_path.string() + ": right-hand side must be a single column");
  if (rhs.rows() != inst.A.rows())
    throw ConfigError("dimension mismatch: " + matrix_path.string() + " has " +
                      std::to_string(inst.A.rows()) + " rows but " + rhs_path.string() + " has " +
                      std::to_string(rhs.rows()) + " entries");
  inst.b = rhs.col(0);
  return inst;
}

void write_matrix_market(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf << '\n';
    }
  if (!out) throw std::system_error(errno, std::generic_category(), "write failed: " + path.string());
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw std::system_error(errno, std::generic_category(), "write failed: " + path.string());
}

}  // namespace bigsam
