#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace cady::causal {

/// Number of labeled DAGs on n nodes:
/// a_n = sum_{k=1..n} (-1)^(k-1) C(n, k) 2^(k(n-k)) a_{n-k}, a_0 = 1.
boost::multiprecision::cpp_int dag_count(unsigned n_nodes);

}  // namespace cady::causal
