#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "vmm/allocator.hpp"
#include "vmm/hierarchy.hpp"
#include "vmm/trace.hpp"

namespace vmm {

/// Failure while replaying a trace; carries the index of the offending record.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::size_t index, const std::string& what)
      : std::runtime_error("record " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct AccessEvent {
  std::size_t index;
  const TraceRecord& record;
  PageFrame frame;
  PhysAddr paddr;
  const AccessOutcome& outcome;
};

using AccessObserver = std::function<void(const AccessEvent&)>;

/// Replays `trace` in order: each record is translated through the allocator
/// (app ids are the trace's app indices) and then sent through the hierarchy.
/// Every trace app must already be registered with the allocator.
Metrics run_trace(const Trace& trace, PageAllocator& alloc, Hierarchy& hierarchy,
                  const AccessObserver& observer = {});

}  // namespace vmm
