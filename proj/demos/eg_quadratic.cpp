// SPDX-License-Identifier: Apache-2.0
// Minimizes a quadratic on the simplex with the natural link (exponentiated
// gradient) and with a Tsallis link, printing the loss every 50 iterations.
#include <cstdio>

#include "dmd/dmd.hpp"

int main() {
  using namespace dmd;
  const SimplexPoint target({0.1, 0.2, 0.3, 0.4});
  const Problem problem = quadratic_problem(target);

  for (const auto& fam : {LinkFamily::natural(), LinkFamily::tsallis(1.5)}) {
    DescentConfig cfg;
    cfg.family = fam;
    cfg.eta = {0.5, Schedule::Constant};
    cfg.max_iters = 500;
    cfg.grad_tol = 1e-10;
    const Trace trace = run(cfg, problem, SimplexPoint::uniform(4));
    std::printf("%s\n", fam.describe().c_str());
    for (const auto& rec : trace.records) {
      if (rec.t % 50 == 0) std::printf("  t=%4zu loss=%.3e\n", rec.t, rec.loss);
    }
    const auto& w = trace.last().w;
    std::printf("  final w = [%.6f, %.6f, %.6f, %.6f] after %zu iterations\n", w[0], w[1], w[2],
                w[3], trace.iterations());
  }
  return 0;
}
