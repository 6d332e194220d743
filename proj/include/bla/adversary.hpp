#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bla/agreement.hpp"
#include "bla/simnet.hpp"

namespace bla {

// What strategies need to know about the protocol under attack.
struct AttackSurface {
  // Honest, non-strict machine for a Byzantine id.
  ProtocolFactory shadow;
  // The i-th atom a Byzantine may inject that it never committed in epoch 0.
  std::function<Atom(ProcessId byz, std::uint64_t i)> fresh;
};

std::vector<std::string> builtin_strategy_names();

// Throws ConfigError for an unknown name.
AdversaryFactory make_adversary(const std::string& name, std::uint64_t seed, AttackSurface surface);

// Choice per (round, Byzantine, correct recipient): an alphabet index, or
// alphabet_size for bottom.
struct Behavior {
  std::vector<std::vector<std::vector<std::uint32_t>>> choice;
  std::uint32_t at(std::size_t round, std::size_t byz, std::size_t recipient) const {
    return choice[round][byz][recipient];
  }
};

class BehaviorSpace {
 public:
  static constexpr std::uint64_t kDefaultBudget = 10'000'000;

  // Throws BudgetExceeded when the space exceeds budget.
  BehaviorSpace(std::uint32_t n, std::uint32_t f, std::uint32_t alphabet_size, std::uint32_t rounds,
                std::uint64_t budget = kDefaultBudget);

  std::uint64_t size() const { return size_; }
  Behavior at(std::uint64_t index) const;
  template <typename F>
  void for_each(F&& fn) const {
    for (std::uint64_t i = 0; i < size_; ++i) fn(at(i));
  }

 private:
  std::uint32_t n_, f_, alphabet_, rounds_;
  std::uint64_t size_ = 1;
};

BehaviorSpace enumerate_adversaries(std::uint32_t n, std::uint32_t f, std::uint32_t alphabet_size,
                                    std::uint32_t rounds,
                                    std::uint64_t budget = BehaviorSpace::kDefaultBudget);

}  // namespace bla
