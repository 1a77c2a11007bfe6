// Hitting times of the all-plus state on an L x L box with + boundary.
#include <cstdio>
#include <cstdlib>

#include "zerotemp.hpp"

int main(int argc, char** argv) {
  using namespace zerotemp;
  const int L = argc > 1 ? std::atoi(argv[1]) : 32;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 20;
  const Region box = hypercube(L, 2);
  const auto topo = Topology::build(box);
  const auto bc = BoundaryCondition::uniform(box, kPlus);

  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    DynamicsState st(topo, bc, SpinField(box.size(), kMinus));
    RejectionFreeEngine engine(st, derive_seed(7, {"absorb-square", static_cast<std::uint64_t>(r), "events"}));
    const auto res = engine.run_to_absorption(100.0 * L * L);
    if (res.t_plus) times.push_back(*res.t_plus);
  }
  if (times.empty()) return 1;
  std::printf("L=%d  completed=%zu/%d  mean T+=%.2f  T+/L^2=%.3f  q75=%.2f\n", L, times.size(), reps,
              stats::mean(times), stats::mean(times) / (L * L), stats::quantile(times, 0.75));
}
