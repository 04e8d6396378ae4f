#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "attsim/mcu.hpp"
#include "attsim/memmap.hpp"

namespace attsim {

enum class Violation : std::uint8_t {
  KeyAccess,
  SwAttInterrupt,
  SwAttNonAtomicEntryOrExit,
  LmtWrite,
  DmaDuringProtected,
};

const char* violation_name(Violation v);

struct VrasedConfig {
  Range k_region;
  Range swatt;
  Address entry = 0;
  Address exit = 0;
};

struct VrasedState {
  bool in_swatt = false;
  Address last_pc = 0;
};

enum class RataVariant : std::uint8_t { A, B };

struct RataState {
  RataVariant variant = RataVariant::B;
  std::array<std::uint8_t, 16> lmt{};
  bool latch = false;  // variant B: pmem modified since last attestation
};

enum class ApexPhase : std::uint8_t { Idle, Executing, Executed };

enum class ApexClearReason : std::uint8_t {
  None,
  MetadataWrite,
  ErWrite,
  IrqInEr,
  DmaInEr,
  BadEntry,
  BadExit,
  OrWriteAfterExec,
  Restarted,
  Reset,
};

struct ApexState {
  bool exec = false;
  ApexPhase phase = ApexPhase::Idle;
  ApexClearReason last_clear = ApexClearReason::None;
  Address last_pc = 0;  // previous observed PC, for entry/exit judgments
};

struct ApexBounds {
  Address er_min = 0;
  Address er_max = 0;  // address of the last ER instruction
  Address or_min = 0;
  Address or_max = 0;  // exclusive upper bound of OR
};

// Context the bank needs beyond the signal itself: current challenge bytes,
// the simulated clock and the live metadata register values.
struct MonitorContext {
  std::array<std::uint8_t, 16> chal{};
  std::uint64_t cycles = 0;
  ApexBounds bounds;
};

// Pure transition functions; callers decide whether to store the next state.

struct VrasedResult {
  VrasedState next;
  std::vector<Violation> violations;
};
VrasedResult vrased_check(const BusSignals& sig, const VrasedState& st,
                          const VrasedConfig& cfg);

struct RataResult {
  RataState next;
  std::optional<Violation> violation;  // LmtWrite
};
RataResult rata_update(const BusSignals& sig, const RataState& st,
                       const MonitorContext& ctx, const MemoryMap& map,
                       Address swatt_entry);

ApexState apex_update(const BusSignals& sig, const ApexState& st,
                      const MonitorContext& ctx, const MemoryMap& map);

struct MonitorBank {
  bool vrased_on = false;
  bool rata_on = false;
  bool apex_on = false;

  VrasedConfig vcfg;
  VrasedState vrased;
  RataState rata;
  ApexState apex;

  struct StepOutcome {
    VrasedState vrased;
    RataState rata;
    ApexState apex;
    std::vector<Violation> violations;
  };

  // Run every enabled monitor on the signal (fixed order: access policy,
  // modification tracking, execution tracking) without committing.
  StepOutcome evaluate(const BusSignals& sig, const MonitorContext& ctx,
                       const MemoryMap& map) const;

  void commit(const StepOutcome& o);

  // Volatile monitor state is cleared on reset; LMT and the modification
  // latch persist.
  void on_reset();
};

}  // namespace attsim
