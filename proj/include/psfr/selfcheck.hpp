#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace psfr {

struct SelfcheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfcheckOptions {
  // Negative control: corrupt one tap of the fast-path filter before the
  // comparison with the normal-equations oracle.
  bool perturb_filter = false;
};

// Small-instance oracle suite: filter design vs dense normal equations,
// FFT convolution vs direct summation, coherence vs explicit DFT, and the
// analytic gCNR cases.
std::vector<SelfcheckItem> selfcheck(const SelfcheckOptions& opts = {});

// One "PASS"/"FAIL" line per item; returns true when everything passed.
bool print_report(const std::vector<SelfcheckItem>& items, std::ostream& out);

}  // namespace psfr
