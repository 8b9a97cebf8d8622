#include "mlgan/random.hpp"

#include <sstream>
#include <stdexcept>

namespace mlgan {

Rng::Rng(std::initializer_list<std::uint32_t> seeds) {
  std::seed_seq seq(seeds);
  engine_.seed(seq);
}

Tensor Rng::normal_matrix(std::size_t rows, std::size_t cols) {
  Tensor out({rows, cols});
  for (double& v : out.data()) v = normal();
  return out;
}

std::string Rng::state() const {
  std::ostringstream os;
  os.precision(17);
  os << engine_ << ' ' << normal_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  std::mt19937_64 engine;
  std::normal_distribution<double> normal;
  is >> engine >> normal;
  if (!is) throw std::invalid_argument("rng: malformed state string");
  engine_ = engine;
  normal_ = normal;
}

}  // namespace mlgan
