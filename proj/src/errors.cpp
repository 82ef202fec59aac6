#include "sae/errors.hpp"
