// Locates the 10-state Potts transition, prints the two minima there and the
// allowed magnetization bands for I_d = 0.002.

#include <cstdio>

#include <mft/mft.hpp>

int main() {
  auto M = mft::ModelSpec::potts(10);
  auto tp = mft::find_transition(M);
  std::printf("J_MF = %.10f  m_c = %.10f\n", tp.J_MF, tp.m_c);

  for (auto& r : mft::solve_branches(M, tp.J_MF).roots)
    std::printf("  m = %+.8f  %-8s  phi = %.10f\n", r.m, mft::to_string(r.stability), r.phi);

  double slack = tp.J_MF * mft::error_budget_from_id(M, 0.002).delta_d;
  std::printf("allowed bands (slack %.6f):\n", slack);
  for (auto& b : mft::allowed_bands(M, tp.J_MF, slack)) std::printf("  [%.6f, %.6f]\n", b.lo, b.hi);

  auto id = mft::compute_id(3);
  std::printf("I_3 = %.10f\n", id.value);
}
