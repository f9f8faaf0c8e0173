#pragma once

#include <string>
#include <vector>

#include "hhesim/cipher.hpp"

namespace hhesim::cli {

struct SelftestOptions {
  std::vector<CipherParams> sets;
  bool inject_mix_typo = false;
  unsigned trials = 20;
};

// One verdict line per suite on stdout; true when nothing failed.
bool run_selftest(const SelftestOptions& opt);

}  // namespace hhesim::cli
