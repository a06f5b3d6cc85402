#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "foodpair/corpus.hpp"

namespace foodpair {

// Ingredient token -> fixed-length vector. Iteration order is lexicographic.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim = 0);

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(std::string_view token) const;

  // Throws UnknownIngredientError when absent.
  const Eigen::VectorXd& at(std::string_view token) const;

  // Throws ShapeError on a length mismatch or non-finite entry.
  void insert(std::string token, Eigen::VectorXd vector);

  std::vector<std::string> tokens() const;
  const std::map<std::string, Eigen::VectorXd, std::less<>>& vectors() const { return vectors_; }

  friend bool operator==(const EmbeddingTable& l, const EmbeddingTable& r);

 private:
  int dim_;
  std::map<std::string, Eigen::VectorXd, std::less<>> vectors_;
};

// word2vec-style text format: "<n> <dim>" header, then "token v1 ... vdim".
// Only tokens in `vocabulary` are kept; every one of them must be present.
EmbeddingTable load_embeddings(std::istream& source,
                               const std::set<std::string, std::less<>>& vocabulary);
// Loads every token in the file.
EmbeddingTable load_embeddings(std::istream& source);
void save_embeddings(std::ostream& out, const EmbeddingTable& table);

struct PpmiSvdOptions {
  int dim = 64;
  double shift = 1.0;
  std::uint64_t seed = 0;
};

// Shifted-PPMI co-occurrence matrix over the table's vocabulary (rows in
// lexicographic token order), zero diagonal.
Eigen::MatrixXd shifted_ppmi_matrix(const CountTable& filtered, double shift);

struct SymmetricFactorization {
  Eigen::MatrixXd vectors;  // columns are eigenvectors
  Eigen::VectorXd values;   // ordered by decreasing magnitude
};

// Keeps the `rank` eigenpairs of largest magnitude.
SymmetricFactorization truncated_eigen(const Eigen::MatrixXd& symmetric, int rank);

EmbeddingTable train_ppmi_svd(const CountTable& filtered, PpmiSvdOptions options = {});

// Uniform in [-0.05, 0.05], one vector per token; used for the
// no-pretrained-embedding ablation.
EmbeddingTable random_embeddings(const std::vector<std::string>& tokens, int dim,
                                 std::uint64_t seed);

double cosine(std::span<const double> u, std::span<const double> v);
double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

}  // namespace foodpair
