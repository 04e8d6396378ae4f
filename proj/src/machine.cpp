#include "attsim/machine.hpp"

#include <cassert>

namespace attsim {

Machine::Machine(const MachineConfig& cfg) : cfg_(cfg) {
  st.mem.assign(0x10000, 0);
  st.set_pc(cfg_.map.pmem.start);
  st.set_sp(static_cast<Word>(cfg_.map.dmem.end()));
  install_rom();

  const Features& f = cfg_.feat;
  bank.vrased_on = f.vrased;
  bank.rata_on = f.rata_a || f.rata_b;
  bank.apex_on = f.apex;
  bank.vcfg.k_region = cfg_.map.k_region;
  bank.vcfg.swatt = cfg_.map.swatt;
  bank.vcfg.entry = cfg_.map.swatt_entry;
  bank.vcfg.exit = cfg_.map.swatt_exit;
  bank.rata.variant = f.rata_a ? RataVariant::A : RataVariant::B;
}

void Machine::install_rom() {
  // Boot stub: jump to the application entry.
  auto boot = isa_encode({Opcode::Jmp, 0, 0, cfg_.map.pmem.start});
  host_write(cfg_.map.boot_vector, boot);
  // Attestation stub placeholder: a software call of the stub enters at the
  // entry point and immediately returns through the legal exit; the real
  // sweep is driven by ief_run.
  auto entry_jmp = isa_encode({Opcode::Jmp, 0, 0, cfg_.map.swatt_exit});
  host_write(cfg_.map.swatt_entry, entry_jmp);
  auto ret = isa_encode({Opcode::Ret, 0, 0, 0});
  host_write(cfg_.map.swatt_exit, ret);
  host_write(cfg_.map.k_region.start, cfg_.key);
}

void Machine::load(std::span<const std::uint8_t> image) {
  load_program(st, image, cfg_.map);
  install_rom();
  pristine_pmem_.assign(st.mem.begin() + cfg_.map.pmem.start,
                        st.mem.begin() + cfg_.map.pmem.end());
  dirty_pmem_.clear();
}

void Machine::host_write(Address a, std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < bytes.size(); ++i)
    st.mem[static_cast<Address>(a + i)] = bytes[i];
}

std::vector<std::uint8_t> Machine::peek_range(Address a,
                                              std::uint32_t len) const {
  std::vector<std::uint8_t> out(len);
  for (std::uint32_t i = 0; i < len; ++i)
    out[i] = st.mem[static_cast<Address>(a + i)];
  return out;
}

std::array<std::uint8_t, 32> Machine::key_bytes() const {
  std::array<std::uint8_t, 32> k{};
  for (int i = 0; i < 32; ++i)
    k[i] = st.mem[static_cast<Address>(cfg_.map.k_region.start + i)];
  return k;
}

MonitorContext Machine::make_ctx() const {
  MonitorContext ctx;
  for (int i = 0; i < 16; ++i)
    ctx.chal[i] = st.mem[static_cast<Address>(cfg_.map.chal.start + i)];
  ctx.cycles = st.cycles;
  ctx.bounds.er_min = st.read_word(cfg_.map.er_min_reg);
  ctx.bounds.er_max = st.read_word(cfg_.map.er_max_reg);
  ctx.bounds.or_min = st.read_word(cfg_.map.or_min_reg);
  ctx.bounds.or_max = st.read_word(cfg_.map.or_max_reg);
  return ctx;
}

void Machine::sync_monitor_memory() {
  for (int i = 0; i < 16; ++i)
    st.mem[static_cast<Address>(cfg_.map.lmt.start + i)] = bank.rata.lmt[i];
}

void Machine::force_reset(const std::vector<Violation>& violations,
                          const BusSignals& sig) {
  for (auto v : violations) {
    EvidenceRecord r;
    r.cycle = st.cycles;
    r.kind = "violation";
    r.detail = violation_name(v);
    r.pc = sig.pc;
    if (!sig.accesses.empty()) r.access = sig.accesses.front();
    evidence.push_back(std::move(r));
  }
  mcu_reset(st, cfg_.map);
  bank.on_reset();
}

void Machine::program_dma(Address src, Address dst, std::uint16_t len_words) {
  if (len_words == 0) throw DmaRangeError("dma length is zero");
  for (std::uint32_t i = 0; i < len_words; ++i) {
    const auto s = static_cast<std::uint32_t>(src) + 2 * i;
    const auto d = static_cast<std::uint32_t>(dst) + 2 * i;
    if (s + 1 > 0xFFFF || d + 1 > 0xFFFF ||
        !cfg_.map.mapped(static_cast<Address>(s)) ||
        !cfg_.map.mapped(static_cast<Address>(s + 1)) ||
        !cfg_.map.mapped(static_cast<Address>(d)) ||
        !cfg_.map.mapped(static_cast<Address>(d + 1)))
      throw DmaRangeError("dma span leaves mapped memory");
  }
  if (src % 2 || dst % 2) throw DmaRangeError("dma addresses must be aligned");
  st.dma = {src, dst, len_words, 0, true};
}

void Machine::schedule(const ScheduledAction& a) {
  schedule_.insert({a.at_cycle, a});
}

void Machine::feed_input(std::span<const Word> words) {
  for (Word w : words) io.gpio_in.push_back(w);
}

bool Machine::exec_action(const ScheduledAction& a) {
  switch (a.kind) {
    case ScheduledAction::Kind::RaiseIrq:
      trigger_interrupt();
      return true;
    case ScheduledAction::Kind::ProgramDma:
      program_dma(a.src, a.dst, a.len_words);
      return true;
    case ScheduledAction::Kind::FeedInput:
      feed_input(a.words);
      return true;
    case ScheduledAction::Kind::WriteMem: {
      Address at = a.addr;
      for (Word w : a.words) {
        poke_software(at, w);
        at = static_cast<Address>(at + 2);
      }
      return true;
    }
    case ScheduledAction::Kind::CorruptStack: {
      const Address at = static_cast<Address>(st.sp() + a.sp_offset);
      poke_software(at, a.words.empty() ? 0 : a.words[0]);
      return true;
    }
    case ScheduledAction::Kind::ReplacePmem: {
      dirty_pmem_.push_back(
          {a.offset, static_cast<std::uint32_t>(a.bytes.size())});
      Address at = static_cast<Address>(cfg_.map.pmem.start + a.offset);
      for (std::size_t i = 0; i + 1 < a.bytes.size(); i += 2) {
        poke_software(at, static_cast<Word>(a.bytes[i] | (a.bytes[i + 1] << 8)));
        at = static_cast<Address>(at + 2);
      }
      return true;
    }
    case ScheduledAction::Kind::RestorePmem: {
      for (const auto& [off, len] : dirty_pmem_) {
        Address at = static_cast<Address>(cfg_.map.pmem.start + off);
        for (std::uint32_t i = 0; i + 1 < len; i += 2) {
          poke_software(at, static_cast<Word>(pristine_pmem_[off + i] |
                                              (pristine_pmem_[off + i + 1]
                                               << 8)));
          at = static_cast<Address>(at + 2);
        }
      }
      dirty_pmem_.clear();
      return true;
    }
  }
  return true;
}

void Machine::apply_due_actions() {
  auto software_modeled = [](ScheduledAction::Kind k) {
    return k == ScheduledAction::Kind::WriteMem ||
           k == ScheduledAction::Kind::ReplacePmem ||
           k == ScheduledAction::Kind::RestorePmem ||
           k == ScheduledAction::Kind::CorruptStack;
  };
  std::vector<ScheduledAction> deferred;
  while (!schedule_.empty() && schedule_.begin()->first <= st.cycles) {
    ScheduledAction a = schedule_.begin()->second;
    schedule_.erase(schedule_.begin());
    if (in_protected_run && software_modeled(a.kind)) {
      // Co-resident software cannot run while the core executes protected
      // code; its stores land at the next unprotected boundary.
      deferred.push_back(std::move(a));
      continue;
    }
    exec_action(a);
  }
  for (auto& a : deferred) {
    a.at_cycle = st.cycles;  // keep ordering stable
    schedule_.insert({a.at_cycle, a});
  }
}

bool Machine::poke_software(Address a, Word v) {
  BusSignals sig;
  sig.pc = st.pc();
  sig.accesses.push_back({a, MemAccess::Kind::Write, MemAccess::Agent::Core});
  if (cfg_.map.pmem.contains(a)) sig.pmem_write = true;

  const MonitorContext ctx = make_ctx();
  auto outcome = bank.evaluate(sig, ctx, cfg_.map);
  if (record_trace) trace.push_back({sig, !outcome.violations.empty()});
  st.cycles += isa_cycles(Opcode::Sti);
  if (!outcome.violations.empty()) {
    force_reset(outcome.violations, sig);
    return false;
  }
  st.write_word(a, v);
  if (a == cfg_.map.dma_ctl && v != 0) {
    DmaConfig d;
    d.src = st.read_word(cfg_.map.dma_src);
    d.dst = st.read_word(cfg_.map.dma_dst);
    d.len_words = st.read_word(cfg_.map.dma_len);
    d.active = d.len_words > 0;
    if (d.active) {
      try {
        program_dma(d.src, d.dst, d.len_words);
      } catch (const DmaRangeError&) {
        st.dma = {};  // hardware refuses an invalid configuration
      }
    }
  }
  const auto before = bank.apex;
  bank.commit(outcome);
  sync_monitor_memory();
  if (bank.apex_on && before.exec && !bank.apex.exec) {
    evidence.push_back({st.cycles, "apex_clear",
                        std::string(), sig.pc, sig.accesses.front()});
  }
  return true;
}

StepResult Machine::step() {
  apply_due_actions();
  StepResult res;
  if (st.halted && !st.dma.active) {  // DMA proceeds while the core sleeps
    res.idle = true;
    return res;
  }

  StepEffect eff;
  BusSignals sig;
  compute_step(st, cfg_.map, io, eff, sig);

  const MonitorContext ctx = make_ctx();
  auto outcome = bank.evaluate(sig, ctx, cfg_.map);
  if (record_trace) trace.push_back({sig, !outcome.violations.empty()});

  if (!outcome.violations.empty()) {
    st.cycles += eff.cycles;
    force_reset(outcome.violations, sig);
    res.reset = true;
    res.sig = std::move(sig);
    return res;
  }

  if (record_transfers && eff.instr_size > 0 && eff.fault == Fault::None &&
      eff.next_pc != static_cast<Word>(sig.pc + eff.instr_size)) {
    transfers.push_back({sig.pc, eff.next_pc});
  }

  const bool exec_before = bank.apex.exec;
  commit_step(st, io, eff);
  bank.commit(outcome);
  sync_monitor_memory();
  if (bank.apex_on && exec_before && !bank.apex.exec) {
    evidence.push_back({st.cycles, "apex_clear", std::string(), sig.pc,
                        sig.accesses.empty()
                            ? std::optional<MemAccess>{}
                            : std::optional<MemAccess>{sig.accesses.front()}});
  }
  res.sig = std::move(sig);
  return res;
}

std::uint64_t Machine::run(std::uint64_t max_steps) {
  std::uint64_t n = 0;
  while (n < max_steps) {
    auto r = step();
    if (r.idle) break;
    ++n;
  }
  return n;
}

std::uint64_t Machine::run_while_pc_in(Address lo, Address hi,
                                       std::uint64_t max_steps) {
  std::uint64_t n = 0;
  while (n < max_steps && !st.halted && st.pc() >= lo && st.pc() <= hi) {
    step();
    ++n;
  }
  return n;
}

bool Machine::offer_ief_signal(const BusSignals& sig) {
  const MonitorContext ctx = make_ctx();
  auto outcome = bank.evaluate(sig, ctx, cfg_.map);
  if (record_trace) trace.push_back({sig, !outcome.violations.empty()});
  if (!outcome.violations.empty()) {
    force_reset(outcome.violations, sig);
    return false;
  }
  bank.commit(outcome);
  sync_monitor_memory();
  return true;
}

}  // namespace attsim
