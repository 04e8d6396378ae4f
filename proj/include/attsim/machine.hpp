#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attsim/mcu.hpp"
#include "attsim/memmap.hpp"
#include "attsim/monitors.hpp"

namespace attsim {

struct Features {
  bool vrased = false;
  bool rata_a = false;
  bool rata_b = false;
  bool apex = false;
  // instrumentation-level features carried for scenario bookkeeping
  bool tinycfa = false;
  bool dialed = false;
};

struct MachineConfig {
  MemoryMap map = MemoryMap::standard();
  std::array<std::uint8_t, 32> key{};
  Features feat;
};

struct ScheduledAction {
  enum class Kind {
    WriteMem,
    ProgramDma,
    RaiseIrq,
    ReplacePmem,
    RestorePmem,
    FeedInput,
    CorruptStack,
  };
  std::uint64_t at_cycle = 0;
  Kind kind = Kind::RaiseIrq;
  Address addr = 0;
  std::vector<Word> words;
  Address src = 0, dst = 0;
  std::uint16_t len_words = 0;
  std::uint32_t offset = 0;  // into pmem, for ReplacePmem
  std::vector<std::uint8_t> bytes;
  std::int32_t sp_offset = 0;  // for CorruptStack
};

struct EvidenceRecord {
  std::uint64_t cycle = 0;
  std::string kind;    // "violation" | "apex_clear"
  std::string detail;  // violation / clear reason name
  Address pc = 0;
  std::optional<MemAccess> access;
};

struct TraceEntry {
  BusSignals sig;
  bool reset = false;
};

struct StepResult {
  bool reset = false;
  bool idle = false;  // machine halted; nothing executed
  BusSignals sig;
};

// One emulated device: core state, monitor bank, I/O streams, the scripted
// adversary schedule and the evidence log. Owned by a single thread.
class Machine {
 public:
  explicit Machine(const MachineConfig& cfg);

  void load(std::span<const std::uint8_t> image);

  StepResult step();
  // Steps until halt/fault or the step budget runs out. Returns steps taken.
  std::uint64_t run(std::uint64_t max_steps);
  // Steps while PC stays within [lo, hi]; stops when it leaves, the machine
  // halts or the budget runs out.
  std::uint64_t run_while_pc_in(Address lo, Address hi,
                                std::uint64_t max_steps);

  // Adversary / environment entry points (step-boundary granularity).
  void trigger_interrupt() { st.irq_pending = true; }
  void program_dma(Address src, Address dst, std::uint16_t len_words);
  void schedule(const ScheduledAction& a);
  void feed_input(std::span<const Word> words);

  // One software-modeled word store, routed through the monitor bank like
  // any other store. Returns false when vetoed (reset applied).
  bool poke_software(Address a, Word v);
  // Model an application-level vector (call/jump) without a bus signal; the
  // next executed instruction is what the monitors observe.
  void poke_pc(Address a) { st.set_pc(a); }
  // Clear a HALT so a request can drive the device again; hard faults stick.
  void wake() {
    if (st.fault == Fault::None) st.halted = false;
  }

  // Host/provisioning access, not observable by monitors.
  void host_write(Address a, std::span<const std::uint8_t> bytes);
  std::uint8_t peek(Address a) const { return st.mem[a]; }
  Word peek_word(Address a) const { return st.read_word(a); }
  std::vector<std::uint8_t> peek_range(Address a, std::uint32_t len) const;

  // Attestation-stub support: offer a synthetic signal; false means the
  // bank vetoed it and the machine has been reset.
  bool offer_ief_signal(const BusSignals& sig);
  void add_cycles(std::uint64_t n) { st.cycles += n; }
  // Applies scheduled actions due at the current cycle. Software-modeled
  // actions are deferred while a protected run is in progress.
  void apply_due_actions();

  void force_reset(const std::vector<Violation>& violations,
                   const BusSignals& sig);

  MonitorContext make_ctx() const;
  const MemoryMap& map() const { return cfg_.map; }
  const MachineConfig& config() const { return cfg_; }
  std::array<std::uint8_t, 32> key_bytes() const;

  McuState st;
  IoState io;
  MonitorBank bank;
  std::vector<EvidenceRecord> evidence;

  bool record_trace = false;
  std::vector<TraceEntry> trace;
  bool record_transfers = false;
  std::vector<std::pair<Address, Address>> transfers;  // (site, destination)

  bool in_protected_run = false;

 private:
  void install_rom();
  void sync_monitor_memory();
  bool exec_action(const ScheduledAction& a);

  MachineConfig cfg_;
  std::vector<std::uint8_t> pristine_pmem_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dirty_pmem_;
  std::multimap<std::uint64_t, ScheduledAction> schedule_;
};

}  // namespace attsim
