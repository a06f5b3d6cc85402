#include "foodpair/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "foodpair/error.hpp"
#include "foodpair/pairscore.hpp"
#include "foodpair/random.hpp"
#include "foodpair/text_format.hpp"

namespace foodpair {

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim < 0) throw ShapeError("embedding dimension must be non-negative");
}

bool EmbeddingTable::contains(std::string_view token) const {
  return vectors_.find(token) != vectors_.end();
}

const Eigen::VectorXd& EmbeddingTable::at(std::string_view token) const {
  const auto it = vectors_.find(token);
  if (it == vectors_.end()) throw UnknownIngredientError(std::string(token), {});
  return it->second;
}

void EmbeddingTable::insert(std::string token, Eigen::VectorXd vector) {
  if (vector.size() != dim_) {
    throw ShapeError("vector for '" + token + "' has " + std::to_string(vector.size()) +
                     " entries, expected " + std::to_string(dim_));
  }
  if (!vector.allFinite()) throw ShapeError("vector for '" + token + "' is not finite");
  vectors_.insert_or_assign(std::move(token), std::move(vector));
}

std::vector<std::string> EmbeddingTable::tokens() const {
  std::vector<std::string> out;
  out.reserve(vectors_.size());
  for (const auto& [token, vec] : vectors_) out.push_back(token);
  return out;
}

bool operator==(const EmbeddingTable& l, const EmbeddingTable& r) {
  if (l.dim_ != r.dim_ || l.vectors_.size() != r.vectors_.size()) return false;
  auto li = l.vectors_.begin();
  for (auto ri = r.vectors_.begin(); ri != r.vectors_.end(); ++li, ++ri) {
    if (li->first != ri->first || li->second != ri->second) return false;
  }
  return true;
}

namespace {

EmbeddingTable load_embeddings_impl(std::istream& source,
                                    const std::set<std::string, std::less<>>* vocabulary) {
  std::string line;
  if (!std::getline(source, line)) throw InputError("embedding file is empty");
  const auto header = split(line, ' ');
  if (header.size() != 2) throw InputError("embedding line 1: expected '<n_tokens> <dim>'");
  const std::int64_t declared = parse_int(header[0]);
  const std::int64_t dim = parse_int(header[1]);
  if (dim <= 0 || declared < 0) throw InputError("embedding line 1: bad header values");

  EmbeddingTable table(static_cast<int>(dim));
  std::int64_t line_number = 1;
  std::int64_t rows = 0;
  while (std::getline(source, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++rows;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      try {
        values.push_back(parse_double(field));
      } catch (const InputError& e) {
        throw InputError("embedding line " + std::to_string(line_number) + ": " + e.what());
      }
    }
    if (static_cast<std::int64_t>(values.size()) != dim) {
      throw InputError("embedding line " + std::to_string(line_number) + ": expected " +
                       std::to_string(dim) + " values, found " + std::to_string(values.size()));
    }
    if (vocabulary && !vocabulary->contains(token)) continue;
    table.insert(token, Eigen::Map<const Eigen::VectorXd>(values.data(), dim));
  }
  if (rows != declared) {
    throw InputError("embedding header declares " + std::to_string(declared) + " tokens, found " +
                     std::to_string(rows));
  }
  if (vocabulary) {
    std::string missing;
    std::size_t missing_count = 0;
    for (const auto& token : *vocabulary) {
      if (table.contains(token)) continue;
      missing += (missing_count++ ? ", " : "") + token;
    }
    if (missing_count > 0) {
      throw InputError("embedding file lacks " + std::to_string(missing_count) +
                       " vocabulary token(s): " + missing);
    }
  }
  return table;
}

}  // namespace

EmbeddingTable load_embeddings(std::istream& source,
                               const std::set<std::string, std::less<>>& vocabulary) {
  return load_embeddings_impl(source, &vocabulary);
}

EmbeddingTable load_embeddings(std::istream& source) {
  return load_embeddings_impl(source, nullptr);
}

void save_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (const auto& [token, vec] : table.vectors()) {
    out << token;
    for (Eigen::Index k = 0; k < vec.size(); ++k) out << ' ' << format_fixed(vec[k], 6);
    out << '\n';
  }
}

Eigen::MatrixXd shifted_ppmi_matrix(const CountTable& filtered, double shift) {
  if (!(shift > 0.0)) throw InputError("PPMI shift must be positive");
  const auto vocab = filtered.vocabulary();
  std::unordered_map<std::string, Eigen::Index> row;
  for (std::size_t i = 0; i < vocab.size(); ++i) row.emplace(vocab[i], static_cast<Eigen::Index>(i));

  const auto n = static_cast<Eigen::Index>(vocab.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double log_shift = std::log(shift);
  for (const auto& [key, cooc] : filtered.cooccurrence) {
    const double value =
        std::max(0.0, pmi(cooc, filtered.occurrence_of(key.first),
                          filtered.occurrence_of(key.second), filtered.recipe_count) -
                          log_shift);
    const Eigen::Index x = row.at(key.first);
    const Eigen::Index y = row.at(key.second);
    m(x, y) = value;
    m(y, x) = value;
  }
  return m;
}

SymmetricFactorization truncated_eigen(const Eigen::MatrixXd& symmetric, int rank) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw ShapeError("matrix must be square");
  if (rank < 1 || rank > n) throw InputError("rank must lie in [1, n]");

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition failed");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) {
    return std::abs(values[l]) > std::abs(values[r]);
  });

  SymmetricFactorization result;
  result.vectors.resize(n, rank);
  result.values.resize(rank);
  for (int k = 0; k < rank; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    // Eigenvectors are defined up to sign; pin the largest entry positive.
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v[pivot] < 0) v = -v;
    result.vectors.col(k) = v;
    result.values[k] = values[src];
  }
  return result;
}

EmbeddingTable train_ppmi_svd(const CountTable& filtered, PpmiSvdOptions options) {
  const auto vocab = filtered.vocabulary();
  if (vocab.size() < 2) throw InputError("vocabulary needs at least 2 tokens");
  if (options.dim < 1 || static_cast<std::size_t>(options.dim) > vocab.size()) {
    throw InputError("embedding dim " + std::to_string(options.dim) +
                     " exceeds vocabulary size " + std::to_string(vocab.size()));
  }
  const Eigen::MatrixXd m = shifted_ppmi_matrix(filtered, options.shift);
  const auto factors = truncated_eigen(m, options.dim);
  const Eigen::MatrixXd rows = factors.vectors * factors.values.cwiseAbs().cwiseSqrt().asDiagonal();

  EmbeddingTable table(options.dim);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    table.insert(vocab[i], rows.row(static_cast<Eigen::Index>(i)).transpose());
  }
  return table;
}

EmbeddingTable random_embeddings(const std::vector<std::string>& tokens, int dim,
                                 std::uint64_t seed) {
  EmbeddingTable table(dim);
  Rng rng(seed);
  for (const auto& token : tokens) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v[k] = -0.05 + 0.1 * unit_uniform(rng);
    table.insert(token, std::move(v));
  }
  return table;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("cosine of vectors with different lengths");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) throw InputError("cosine of a zero vector is undefined");
  // sqrt(uu * uu) == uu exactly, so cosine(u, u) is exactly 1.
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return cosine(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
                std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

}  // namespace foodpair
