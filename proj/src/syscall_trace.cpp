#include "bootseq/syscall_trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bootseq/error.hpp"
#include "bootseq/rng.hpp"

namespace bootseq {

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::legitimate:
      return "legitimate";
    case Label::malicious:
      return "malicious";
    case Label::unknown:
      break;
  }
  return "unknown";
}

Label parse_label(std::string_view text) {
  if (text == "legitimate") return Label::legitimate;
  if (text == "malicious") return Label::malicious;
  if (text == "unknown") return Label::unknown;
  throw InvalidInput("unrecognised label '" + std::string(text) + "'");
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view skip_spaces(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// `1234  rest` or `[pid 1234] rest`. Returns the pid and the remainder.
std::optional<int> take_pid(std::string_view& s) {
  if (starts_with(s, "[pid")) {
    auto close = s.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    auto digits = trim(s.substr(4, close - 4));
    int pid = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), pid);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    s = skip_spaces(s.substr(close + 1));
    return pid;
  }
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0 || i == s.size() || !is_space(s[i])) return std::nullopt;
  int pid = 0;
  std::from_chars(s.data(), s.data() + i, pid);
  s = skip_spaces(s.substr(i));
  return pid;
}

// -t / -tt / -ttt / -r prefixes: digits with ':' or '.', then whitespace.
void take_timestamp(std::string_view& s) {
  std::size_t i = 0;
  bool punct = false;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == ':' || s[i] == '.')) {
    punct = punct || s[i] == ':' || s[i] == '.';
    ++i;
  }
  if (i > 0 && punct && i < s.size() && is_space(s[i])) s = skip_spaces(s.substr(i));
}

std::optional<std::string_view> syscall_name(std::string_view s) {
  std::size_t i = 0;
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return std::nullopt;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
  if (i == s.size() || s[i] != '(') return std::nullopt;
  return s.substr(0, i);
}

}  // namespace

ParseResult parse_strace(std::istream& in, const ParseOptions& options) {
  ParseResult result;
  auto& diag = result.diagnostics;
  std::string raw;
  while (std::getline(in, raw)) {
    ++diag.lines;
    std::string_view line = trim(raw);
    if (line.empty()) {
      ++diag.blank;
      continue;
    }
    if (starts_with(line, "strace: ")) {
      ++diag.banners;
      continue;
    }
    auto pid = take_pid(line);
    take_timestamp(line);
    if (starts_with(line, "--- ")) {
      ++diag.signals;
      continue;
    }
    if (starts_with(line, "+++ ")) {
      ++diag.exits;
      continue;
    }
    if (starts_with(line, "<... ") && line.find("resumed>") != std::string_view::npos) {
      ++diag.resumed;
      continue;
    }
    auto name = syscall_name(line);
    if (!name) {
      if (options.strict) throw ParseError(diag.lines, "not a syscall line: " + std::string(line));
      ++diag.malformed;
      continue;
    }
    if (line.find("<unfinished ...>") != std::string_view::npos) ++diag.unfinished;
    result.events.push_back(SyscallEvent{std::string(*name), pid, result.events.size()});
    ++diag.events;
  }
  return result;
}

ParseResult parse_strace(std::string_view text, const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_strace(in, options);
}

Alphabet::Alphabet() : fingerprint_(rng::fnv1a("alphabet")) {}

Alphabet Alphabet::from_names(std::span<const std::string> names) {
  if (names.size() + 1 >= kGap) throw InvalidInput("alphabet too large");
  Alphabet a;
  a.names_.reserve(names.size());
  std::uint64_t h = rng::fnv1a("alphabet");
  for (const auto& name : names) {
    if (name.empty()) throw InvalidInput("empty syscall name in alphabet");
    if (name == kUnknownName) throw InvalidInput("reserved name in alphabet: " + name);
    auto symbol = static_cast<Symbol>(a.names_.size() + 1);
    if (!a.index_.emplace(name, symbol).second)
      throw InvalidInput("duplicate syscall name in alphabet: \"" + name + "\"");
    a.names_.push_back(name);
    h = rng::fnv1a(name, rng::fnv1a("\n", h));
  }
  a.fingerprint_ = h;
  return a;
}

Symbol Alphabet::lookup(std::string_view name) const noexcept { return find(name).value_or(kUnknown); }

std::optional<Symbol> Alphabet::find(std::string_view name) const noexcept {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string_view Alphabet::name(Symbol symbol) const {
  if (symbol == kUnknown) return kUnknownName;
  if (symbol >= size()) throw InvalidInput("symbol " + std::to_string(symbol) + " outside alphabet");
  return names_[symbol - 1];
}

void Alphabet::write(std::ostream& out) const {
  for (const auto& n : names_) out << n << '\n';
}

Alphabet Alphabet::read(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    auto name = trim(line);
    if (!name.empty()) names.emplace_back(name);
  }
  return from_names(names);
}

void Alphabet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write alphabet file " + path.string());
  write(out);
}

Alphabet Alphabet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open alphabet file " + path.string());
  return read(in);
}

Alphabet build_alphabet(std::span<const std::string> names) { return Alphabet::from_names(names); }

EncodeResult encode(std::span<const SyscallEvent> events, const Alphabet& alphabet) {
  EncodeResult r;
  r.sequence.alphabet_id = alphabet.fingerprint();
  r.sequence.symbols.reserve(events.size());
  for (const auto& e : events) {
    Symbol s = alphabet.lookup(e.name);
    if (s == Alphabet::kUnknown) ++r.unknown_names;
    r.sequence.symbols.push_back(s);
  }
  return r;
}

EncodeResult encode_names(std::span<const std::string> names, const Alphabet& alphabet) {
  EncodeResult r;
  r.sequence.alphabet_id = alphabet.fingerprint();
  r.sequence.symbols.reserve(names.size());
  for (const auto& n : names) {
    Symbol s = alphabet.lookup(n);
    if (s == Alphabet::kUnknown) ++r.unknown_names;
    r.sequence.symbols.push_back(s);
  }
  return r;
}

std::vector<std::string> decode(std::span<const Symbol> symbols, const Alphabet& alphabet) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (Symbol s : symbols) out.emplace_back(alphabet.name(s));
  return out;
}

std::vector<Symbol> collapse_repeats(std::span<const Symbol> sequence) {
  std::vector<Symbol> out;
  out.reserve(sequence.size());
  for (Symbol s : sequence)
    if (out.empty() || out.back() != s) out.push_back(s);
  return out;
}

std::vector<Symbol> truncate(std::span<const Symbol> sequence, std::size_t max_len) {
  if (max_len == 0) throw InvalidInput("max_len must be at least 1");
  auto n = std::min(max_len, sequence.size());
  return {sequence.begin(), sequence.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<Symbol> preprocess(std::span<const Symbol> sequence, std::size_t max_len) {
  if (max_len == 0) throw InvalidInput("max_len must be at least 1");
  std::vector<Symbol> out;
  out.reserve(std::min(max_len, sequence.size()));
  for (Symbol s : sequence) {
    if (!out.empty() && out.back() == s) continue;
    if (out.size() == max_len) break;
    out.push_back(s);
  }
  return out;
}

BootSequence preprocess(BootSequence sequence, std::size_t max_len) {
  sequence.symbols = preprocess(sequence.symbols, max_len);
  sequence.preprocessed = true;
  return sequence;
}

bool is_preprocessed(std::span<const Symbol> sequence, std::size_t max_len) noexcept {
  if (sequence.size() > max_len) return false;
  return std::adjacent_find(sequence.begin(), sequence.end()) == sequence.end();
}

void write_sequence(std::ostream& out, const BootSequence& sequence, const Alphabet& alphabet) {
  out << "#app=" << sequence.app_id << " device=" << sequence.device_id
      << " label=" << to_string(sequence.label) << '\n';
  for (Symbol s : sequence.symbols) out << alphabet.name(s) << '\n';
}

void save_sequence(const std::filesystem::path& path, const BootSequence& sequence,
                   const Alphabet& alphabet) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write sequence file " + path.string());
  write_sequence(out, sequence, alphabet);
}

EncodeResult read_sequence(std::istream& in, const Alphabet& alphabet) {
  std::string line;
  std::size_t lineno = 0;
  BootSequence header;
  bool have_header = false;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = trim(line);
    if (!have_header) {
      if (text.empty()) continue;
      if (text.front() != '#') throw ParseError(lineno, "sequence file must start with a '#app=' header");
      std::istringstream fields{std::string(text.substr(1))};
      std::string field;
      bool have_app = false;
      while (fields >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "malformed header field '" + field + "'");
        auto key = field.substr(0, eq);
        auto value = field.substr(eq + 1);
        if (key == "app") {
          header.app_id = value;
          have_app = true;
        } else if (key == "device") {
          header.device_id = value;
        } else if (key == "label") {
          try {
            header.label = parse_label(value);
          } catch (const InvalidInput& e) {
            throw ParseError(lineno, e.what());
          }
        }
      }
      if (!have_app) throw ParseError(lineno, "header lacks app=");
      have_header = true;
      continue;
    }
    if (!text.empty()) names.emplace_back(text);
  }
  if (!have_header) throw ParseError(lineno, "empty sequence file");
  auto r = encode_names(names, alphabet);
  r.sequence.app_id = std::move(header.app_id);
  r.sequence.device_id = std::move(header.device_id);
  r.sequence.label = header.label;
  return r;
}

EncodeResult load_sequence(const std::filesystem::path& path, const Alphabet& alphabet) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open sequence file " + path.string());
  try {
    return read_sequence(in, alphabet);
  } catch (const ParseError& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

}  // namespace bootseq
