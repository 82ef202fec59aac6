#pragma once

namespace sae {

// Upper bound on worker threads for internal loops. 0 restores the default
// (all available cores, or SAE_THREADS when set).
void set_num_threads(int n);
int num_threads();

}  // namespace sae
