#pragma once

#include "modnav/policy/baselines.hpp"
#include "modnav/policy/insect.hpp"
#include "modnav/policy/policy.hpp"

namespace modnav::policy {

template <class T>
std::unique_ptr<Policy<T>> make_policy(const ArchitectureSpec& spec,
                                       uint64_t init_seed) {
  std::unique_ptr<Policy<T>> p;
  switch (spec.kind) {
    case Arch::Insect: p = std::make_unique<InsectPolicy<T>>(spec); break;
    case Arch::CentralizedGru: p = std::make_unique<GruPolicy<T>>(spec); break;
    case Arch::CentralizedMlp: p = std::make_unique<MlpPolicy<T>>(spec); break;
  }
  p->init_weights(init_seed);
  return p;
}

}  // namespace modnav::policy
