#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "attsim/assembler.hpp"
#include "attsim/cfg.hpp"
#include "attsim/memmap.hpp"

namespace attsim {

// Runtime classifier quirk: inserted brackets run with the scratch registers
// pushed, so the live stack pointer sits this many bytes below the original
// frame when the locality check executes. The replay emulator mirrors it.
inline constexpr int kClassifierSpMargin = 8;

// Both logs live inside the output region together with the program output
// area and the cursor words, so the attestation covers all of them:
//   [out area][cf cursor][cf log][i cursor][i log]
struct LogLayout {
  Address out_base = 0;
  std::uint16_t out_len = 0;
  Address cf_cursor = 0;
  Address cf_base = 0;
  std::uint16_t cf_capacity = 0;  // bytes
  bool has_ilog = false;
  Address i_cursor = 0;
  Address i_base = 0;
  std::uint16_t i_capacity = 0;  // bytes
  Address or_min = 0;
  Address or_end = 0;  // exclusive

  Address cf_end() const { return static_cast<Address>(cf_base + cf_capacity); }
  Address i_end() const { return static_cast<Address>(i_base + i_capacity); }
  // Append-only span the guards protect: cursors and log bodies.
  Range protected_span() const {
    const std::uint32_t hi = has_ilog ? i_end() : cf_end();
    return Range{cf_cursor, hi - cf_cursor};
  }
  static LogLayout standard(const MemoryMap& map, bool ilog);
};

struct InstrumentedProgram {
  AsmProgram prog;
  AssembledImage image;
  LogLayout layout;
  Address er_min = 0;
  Address er_max = 0;   // last ER instruction (the appended landing NOP sits
                        // beyond it and is where aborts exit to)
  Address abort_pad = 0;
  // address maps between the original image (at the same base) and the
  // instrumented image; includes call fall-through pairs
  std::map<Address, Address> orig_to_instr;
  std::map<Address, Address> instr_to_orig;
  std::set<Address> trace_marks;  // semantic transfer sites, instrumented
};

// Control-flow logging pass: every control transfer is prepended with an
// append of its destination to the CF log; capacity misses branch to an
// abort pad outside ER. Direct stores into the protected span are rejected
// at instrument time, indirect stores get a runtime range guard.
InstrumentedProgram instrument_cfa(const AsmProgram& prog, Address er_base,
                                   const LogLayout& layout);

// Input logging pass on top of the control-flow pass: every non-local load
// (and every port read) appends (address, value) to the I log.
InstrumentedProgram instrument_dfa(const AsmProgram& prog, Address er_base,
                                   const LogLayout& layout);

// Everything the verifier keeps about an attestable program.
struct ProgramKnowledge {
  AsmProgram orig_prog;
  AssembledImage orig_img;
  Cfg orig_cfg;
  bool instrumented = false;
  InstrumentedProgram instr;
  LogLayout layout;
  Address er_base = 0;
};

ProgramKnowledge make_knowledge(const std::string& er_text, Address er_base,
                                const LogLayout& layout, bool cfa, bool dfa);

struct OverheadRow {
  std::string name;
  std::size_t orig_bytes = 0;
  std::size_t instr_bytes = 0;
  double code_pct = 0;
  std::uint64_t orig_cycles = 0;
  std::uint64_t instr_cycles = 0;
  double runtime_pct = 0;
  std::size_t runs = 0;
  bool outputs_match = true;
};

// Runs both programs bare (no monitors) over the given input vectors and
// reports size and cycle deltas.
OverheadRow measure_overhead(const std::string& name,
                             const std::string& orig_text,
                             const std::string& instr_text, Address base,
                             const LogLayout& layout,
                             const std::vector<std::vector<Word>>& inputs);

}  // namespace attsim
