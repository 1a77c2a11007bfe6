// Two ordered copies under one event stream stay ordered.
#include <cstdio>

#include "zerotemp.hpp"

int main() {
  using namespace zerotemp;
  const Region box = hypercube(12, 3);
  const auto topo = Topology::build(box);

  CoupledRun run;
  run.states.emplace_back(topo, BoundaryCondition::uniform(box, kMinus), SpinField(box.size(), kMinus));
  run.states.emplace_back(topo, BoundaryCondition::uniform(box, kPlus), SpinField(box.size(), kMinus));
  run.states.emplace_back(topo, BoundaryCondition::uniform(box, kPlus), SpinField(box.size(), kPlus));
  run.comparisons = {{0, 1}, {1, 2}};
  EventStream stream(42, box.size());
  const auto rep = coupled_run(run, stream, 50.0);

  std::printf("events=%llu violations=%zu\n", static_cast<unsigned long long>(rep.events), rep.violations.size());
  for (std::size_t k = 0; k < run.states.size(); ++k)
    std::printf("copy %zu: %zu minus sites left\n", k, run.states[k].field().minus_count());
  return rep.ok() ? 0 : 2;
}
