#pragma once

// Trace ingestion and preprocessing: strace text -> syscall events -> symbol
// sequences over a fixed alphabet, plus the on-disk sequence and alphabet
// formats shared by every other module.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bootseq {

using Symbol = std::uint16_t;

// Marks a gap column in an aligned sequence. Never a valid alphabet index.
inline constexpr Symbol kGap = std::numeric_limits<Symbol>::max();

inline constexpr std::size_t kDefaultMaxLen = 2500;

enum class Label { legitimate, malicious, unknown };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view text);

struct SyscallEvent {
  std::string name;
  std::optional<int> pid;
  std::size_t ordinal = 0;
};

struct ParseDiagnostics {
  std::size_t lines = 0;
  std::size_t events = 0;
  std::size_t blank = 0;
  std::size_t unfinished = 0;  // events that started as `<unfinished ...>`
  std::size_t resumed = 0;
  std::size_t signals = 0;
  std::size_t exits = 0;
  std::size_t banners = 0;  // `strace: Process N attached` and similar
  std::size_t malformed = 0;

  std::size_t skipped() const noexcept { return resumed + signals + exits + banners + malformed; }
};

struct ParseOptions {
  bool strict = false;  // first malformed line throws ParseError
};

struct ParseResult {
  std::vector<SyscallEvent> events;
  ParseDiagnostics diagnostics;
};

ParseResult parse_strace(std::istream& in, const ParseOptions& options = {});
ParseResult parse_strace(std::string_view text, const ParseOptions& options = {});

/// Bijection between syscall names and dense symbol indices. Index 0 is the
/// reserved UNKNOWN symbol; known names occupy 1..size()-1 in list order.
/// Only the ordered name list is persisted; indices are always re-derived.
class Alphabet {
 public:
  static constexpr Symbol kUnknown = 0;
  static constexpr std::string_view kUnknownName = "<unknown>";

  Alphabet();
  static Alphabet from_names(std::span<const std::string> names);

  std::size_t size() const noexcept { return names_.size() + 1; }
  Symbol lookup(std::string_view name) const noexcept;
  std::optional<Symbol> find(std::string_view name) const noexcept;
  std::string_view name(Symbol symbol) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

  // Stable across processes; sequences carry it so that mixing alphabets is caught.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  void save(const std::filesystem::path& path) const;
  static Alphabet load(const std::filesystem::path& path);
  static Alphabet read(std::istream& in);
  void write(std::ostream& out) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Symbol> index_;
  std::uint64_t fingerprint_;
};

Alphabet build_alphabet(std::span<const std::string> names);

struct BootSequence {
  std::string app_id;
  std::string device_id;
  Label label = Label::unknown;
  std::vector<Symbol> symbols;
  bool preprocessed = false;
  std::uint64_t alphabet_id = 0;  // Alphabet::fingerprint(), 0 when unbound

  std::size_t size() const noexcept { return symbols.size(); }
  bool empty() const noexcept { return symbols.empty(); }
};

struct EncodeResult {
  BootSequence sequence;
  std::size_t unknown_names = 0;
};

EncodeResult encode(std::span<const SyscallEvent> events, const Alphabet& alphabet);
EncodeResult encode_names(std::span<const std::string> names, const Alphabet& alphabet);
std::vector<std::string> decode(std::span<const Symbol> symbols, const Alphabet& alphabet);

std::vector<Symbol> collapse_repeats(std::span<const Symbol> sequence);
std::vector<Symbol> truncate(std::span<const Symbol> sequence, std::size_t max_len);

/// Run-collapse followed by truncation, so max_len counts distinct actions.
std::vector<Symbol> preprocess(std::span<const Symbol> sequence, std::size_t max_len);
BootSequence preprocess(BootSequence sequence, std::size_t max_len);

bool is_preprocessed(std::span<const Symbol> sequence, std::size_t max_len) noexcept;

// Sequence file: `#app=<id> device=<id> label=<label>` then one name per line.
void write_sequence(std::ostream& out, const BootSequence& sequence, const Alphabet& alphabet);
void save_sequence(const std::filesystem::path& path, const BootSequence& sequence,
                   const Alphabet& alphabet);
EncodeResult read_sequence(std::istream& in, const Alphabet& alphabet);
EncodeResult load_sequence(const std::filesystem::path& path, const Alphabet& alphabet);

}  // namespace bootseq
