#include "hypervae/nn/rng.hpp"

#include "hypervae/error.hpp"

#include <sstream>

namespace hypervae::nn {

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_ << ' ' << normal_ << ' ' << uniform_;
  return out.str();
}

Rng Rng::deserialize(const std::string& text) {
  Rng rng;
  std::istringstream in(text);
  in >> rng.engine_ >> rng.normal_ >> rng.uniform_;
  if (!in) fail(ErrorCode::parse_error, "malformed serialized rng state");
  return rng;
}

bool operator==(const Rng& a, const Rng& b) {
  return a.engine_ == b.engine_ && a.normal_ == b.normal_ && a.uniform_ == b.uniform_;
}

Matrix sample_standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0) fail(ErrorCode::invalid_argument, "negative sample shape");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = rng.normal();
  return out;
}

}  // namespace hypervae::nn
