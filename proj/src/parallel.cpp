#include "sae/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace sae {

namespace {

int default_threads() {
  if (const char* env = std::getenv("SAE_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_num_procs();
}

int g_threads = 0;

}  // namespace

void set_num_threads(int n) {
  g_threads = n > 0 ? n : 0;
  omp_set_num_threads(num_threads());
}

int num_threads() { return g_threads > 0 ? g_threads : default_threads(); }

}  // namespace sae
