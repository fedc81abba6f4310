#include "cady/causal/dag_count.hpp"

#include <stdexcept>
#include <vector>

namespace cady::causal {

using boost::multiprecision::cpp_int;

cpp_int dag_count(unsigned n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("dag_count: need at least one node");
  std::vector<cpp_int> a(n_nodes + 1);
  a[0] = 1;
  for (unsigned n = 1; n <= n_nodes; ++n) {
    cpp_int total = 0;
    cpp_int binom = 1;  // C(n, k)
    for (unsigned k = 1; k <= n; ++k) {
      binom = binom * (n - k + 1) / k;
      cpp_int term = binom * (cpp_int(1) << (k * (n - k))) * a[n - k];
      if (k % 2 == 1) {
        total += term;
      } else {
        total -= term;
      }
    }
    a[n] = total;
  }
  return a[n_nodes];
}

}  // namespace cady::causal
