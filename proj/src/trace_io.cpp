#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "vmm/trace.hpp"

namespace vmm {

namespace {

std::string_view next_token(std::string_view& rest) {
  const auto start = rest.find_first_not_of(" \t\r");
  if (start == std::string_view::npos) {
    rest = {};
    return {};
  }
  rest.remove_prefix(start);
  const auto end = rest.find_first_of(" \t\r");
  const std::string_view tok = rest.substr(0, end);
  rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
  return tok;
}

template <typename T>
bool parse_int(std::string_view s, T& out, int base) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Trace read_trace(std::istream& in) {
  Trace t;
  std::unordered_map<std::string, std::uint32_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest = line;
    const std::string_view app = next_token(rest);
    if (app.empty() || app.front() == '#') continue;

    const std::string_view core_tok = next_token(rest);
    const std::string_view addr_tok = next_token(rest);
    const std::string_view op_tok = next_token(rest);
    if (op_tok.empty()) throw TraceParseError(lineno, "expected 4 fields: app core vaddr op");
    if (!next_token(rest).empty()) throw TraceParseError(lineno, "trailing fields");

    TraceRecord rec;
    if (!parse_int(core_tok, rec.core, 10)) {
      throw TraceParseError(lineno, "bad core '" + std::string(core_tok) + "'");
    }
    if (addr_tok.size() < 3 || addr_tok[0] != '0' || (addr_tok[1] != 'x' && addr_tok[1] != 'X') ||
        !parse_int(addr_tok.substr(2), rec.vaddr, 16)) {
      throw TraceParseError(lineno, "bad hex address '" + std::string(addr_tok) + "'");
    }
    if (op_tok == "r") {
      rec.op = Op::Read;
    } else if (op_tok == "w") {
      rec.op = Op::Write;
    } else {
      throw TraceParseError(lineno, "unknown op '" + std::string(op_tok) + "'");
    }
    auto [it, inserted] = index.try_emplace(std::string(app), static_cast<std::uint32_t>(t.apps.size()));
    if (inserted) t.apps.emplace_back(app);
    rec.app = it->second;
    t.records.push_back(rec);
  }
  if (in.bad()) throw std::runtime_error("I/O error while reading trace");
  return t;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  return read_trace(in);
}

void write_trace(std::ostream& out, const Trace& t) {
  char buf[32];
  for (const TraceRecord& r : t.records) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, r.vaddr, 16);
    out << t.apps.at(r.app) << ' ' << r.core << " 0x" << std::string_view(buf, end - buf) << ' '
        << (r.op == Op::Read ? 'r' : 'w') << '\n';
  }
}

void write_trace(const std::filesystem::path& path, const Trace& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  write_trace(out, t);
  if (!out) throw std::runtime_error("I/O error while writing " + path.string());
}

}  // namespace vmm
