#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmm {

enum class Op : std::uint8_t { Read, Write };

struct TraceRecord {
  std::uint32_t app = 0;  // index into Trace::apps
  std::uint32_t core = 0;
  std::uint64_t vaddr = 0;
  Op op = Op::Read;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// A memory reference stream over virtual addresses. Records refer to apps by
/// index so that the hot loop never touches strings.
struct Trace {
  std::vector<std::string> apps;
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Text format, one record per line: `<app> <core> 0x<hex vaddr> r|w`.
/// Blank lines and lines starting with '#' are ignored.
Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const Trace& t);
void write_trace(const std::filesystem::path& path, const Trace& t);

}  // namespace vmm
