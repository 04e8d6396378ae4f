#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "attsim/isa.hpp"
#include "attsim/memmap.hpp"

namespace attsim {

enum class Fault : std::uint8_t { None, Decode, Bus, Align };

struct DmaConfig {
  Address src = 0;
  Address dst = 0;
  std::uint16_t len_words = 0;
  std::uint16_t progress = 0;
  bool active = false;
};

struct McuState {
  std::array<Word, kNumRegs> regs{};
  std::vector<std::uint8_t> mem;  // full 64 KiB backing
  std::uint64_t cycles = 0;
  bool zf = false;
  bool cf = false;
  bool irq_pending = false;
  DmaConfig dma;
  bool halted = false;
  Fault fault = Fault::None;

  Word pc() const { return regs[kRegPc]; }
  Word sp() const { return regs[kRegSp]; }
  void set_pc(Word v) { regs[kRegPc] = v; }
  void set_sp(Word v) { regs[kRegSp] = v; }

  Word read_word(Address a) const {
    return static_cast<Word>(mem[a] | (mem[static_cast<Address>(a + 1)] << 8));
  }
  void write_word(Address a, Word v) {
    mem[a] = static_cast<std::uint8_t>(v & 0xFF);
    mem[static_cast<Address>(a + 1)] = static_cast<std::uint8_t>(v >> 8);
  }
};

struct MemAccess {
  Address addr = 0;
  enum class Kind : std::uint8_t { Read, Write } kind = Kind::Read;
  enum class Agent : std::uint8_t { Core, Dma } agent = Agent::Core;
};

// One record per executed instruction, serviced interrupt or DMA word
// transfer, offered to the monitor bank before the effect commits. A DMA
// transfer carries both its read and its write access.
struct BusSignals {
  Address pc = 0;
  std::vector<MemAccess> accesses;
  bool irq = false;
  bool pmem_write = false;
};

struct IoState {
  std::deque<Word> gpio_in;
  std::vector<Word> gpio_out;
  std::vector<std::uint8_t> report;
};

// Initialize state for a loaded image: pmem holds the image, PC at pmem
// start, SP at the top of dmem, cycles zeroed. ROM content is installed by
// the owning machine. Throws ImageError if the image exceeds pmem.
void load_program(McuState& st, std::span<const std::uint8_t> image,
                  const MemoryMap& map);

// Monitor-forced reset: PC to the boot vector, registers and dmem zeroed,
// DMA deactivated, pending interrupt cleared. ROM, pmem, the monitor page
// and the cycle counter are preserved.
void mcu_reset(McuState& st, const MemoryMap& map);

// A computed but uncommitted step.
struct StepEffect {
  std::vector<std::pair<int, Word>> reg_writes;
  bool set_flags = false;
  bool zf = false, cf = false;
  Word next_pc = 0;
  std::vector<std::pair<Address, Word>> mem_writes;
  bool pop_input = false;
  bool push_output = false;
  Word output_word = 0;
  bool irq_serviced = false;
  bool dma_word = false;
  bool dma_done = false;
  bool dma_activate = false;  // via peripheral control register
  DmaConfig dma_next;
  std::uint32_t cycles = 1;
  std::uint8_t instr_size = 0;  // nonzero only for core instructions
  Fault fault = Fault::None;
  bool halt = false;
};

// Compute the next step (DMA word > pending interrupt > core instruction)
// without mutating state. Fills signals for the monitor bank.
void compute_step(const McuState& st, const MemoryMap& map, const IoState& io,
                  StepEffect& eff, BusSignals& sig);

// Apply a computed effect.
void commit_step(McuState& st, IoState& io, const StepEffect& eff);

}  // namespace attsim
