#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>

#include <nlohmann/json.hpp>

#include "bootseq/ensemble.hpp"
#include "bootseq/error.hpp"

namespace bootseq {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void check_app_id(const std::string& app_id) {
  auto ok = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-'; };
  if (app_id.empty() || app_id == "." || app_id == ".." || !std::all_of(app_id.begin(), app_id.end(), ok))
    throw InvalidInput("app id '" + app_id + "' must be non-empty and use only letters, digits, '.', '_' or '-'");
}

std::string entry_file(std::uint64_t serial) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu.seq", static_cast<unsigned long long>(serial));
  return buf;
}

void write_atomically(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

}  // namespace

ReferenceStore::ReferenceStore(Alphabet alphabet, std::size_t capacity)
    : alphabet_(std::move(alphabet)), capacity_(capacity) {
  if (capacity_ == 0) throw InvalidInput("store capacity must be at least 1");
}

std::size_t ReferenceStore::add(BootSequence sequence, bool verified) {
  if (!verified) throw InvalidInput("refusing unverified sequence for the reference store");
  if (sequence.label != Label::legitimate)
    throw InvalidInput("refusing " + std::string(to_string(sequence.label)) + " sequence for the reference store");
  if (!sequence.preprocessed || !is_preprocessed(sequence.symbols, std::numeric_limits<std::size_t>::max()))
    throw InvalidInput("reference sequences must be preprocessed");
  if (sequence.empty()) throw InvalidInput("refusing empty sequence for the reference store");
  if (sequence.alphabet_id != 0 && sequence.alphabet_id != alphabet_.fingerprint())
    throw InvalidInput("sequence was encoded with a different alphabet than the store");
  check_app_id(sequence.app_id);
  sequence.alphabet_id = alphabet_.fingerprint();

  std::unique_lock lock(mutex_);
  auto& app = apps_[sequence.app_id];
  Entry entry{std::move(sequence), app.next_serial++, {}};
  entry.file = entry_file(entry.inserted_at);
  const std::string app_id = entry.sequence.app_id;
  app.items.push_back(std::move(entry));
  std::vector<std::string> evicted;
  while (app.items.size() > capacity_) {
    evicted.push_back(app.items.front().file);
    app.items.erase(app.items.begin());
  }
  if (!root_.empty()) {
    const fs::path dir = root_ / app_id;
    fs::create_directories(dir);
    save_sequence(dir / app.items.back().file, app.items.back().sequence, alphabet_);
    save_app(root_, app_id, app);  // manifest first, so a crash never lists a deleted file
    for (const auto& f : evicted) fs::remove(dir / f);
  }
  return evicted.size();
}

bool ReferenceStore::contains(const std::string& app_id) const {
  std::shared_lock lock(mutex_);
  auto it = apps_.find(app_id);
  return it != apps_.end() && !it->second.items.empty();
}

std::size_t ReferenceStore::size(const std::string& app_id) const {
  std::shared_lock lock(mutex_);
  auto it = apps_.find(app_id);
  return it == apps_.end() ? 0 : it->second.items.size();
}

std::vector<std::string> ReferenceStore::apps() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, app] : apps_)
    if (!app.items.empty()) out.push_back(id);
  return out;
}

std::vector<ReferenceStore::Entry> ReferenceStore::entries(const std::string& app_id) const {
  std::shared_lock lock(mutex_);
  auto it = apps_.find(app_id);
  if (it == apps_.end() || it->second.items.empty())
    throw NotFound("no reference sequences for app '" + app_id + "'");
  return it->second.items;
}

std::vector<BootSequence> ReferenceStore::snapshot(const std::string& app_id) const {
  std::vector<BootSequence> out;
  for (auto& e : entries(app_id)) out.push_back(std::move(e.sequence));
  return out;
}

void ReferenceStore::save_app(const fs::path& root, const std::string& app_id, const AppEntries& app) const {
  json manifest;
  manifest["app_id"] = app_id;
  manifest["capacity"] = capacity_;
  manifest["next_serial"] = app.next_serial;
  json list = json::array();
  for (const auto& e : app.items) list.push_back({{"file", e.file}, {"inserted_at", e.inserted_at}});
  manifest["entries"] = std::move(list);
  write_atomically(root / app_id / "manifest.json", manifest.dump(2) + "\n");
}

void ReferenceStore::save(const fs::path& root) const {
  std::shared_lock lock(mutex_);
  fs::create_directories(root);
  alphabet_.save(root / "alphabet.txt");
  write_atomically(root / "store.json", json{{"capacity", capacity_}}.dump(2) + "\n");
  for (const auto& [id, app] : apps_) {
    fs::create_directories(root / id);
    for (const auto& e : app.items) save_sequence(root / id / e.file, e.sequence, alphabet_);
    save_app(root, id, app);
  }
}

std::unique_ptr<ReferenceStore> ReferenceStore::load(const fs::path& root) {
  if (!fs::exists(root / "alphabet.txt")) throw NotFound("no reference store at " + root.string());
  std::size_t capacity = kDefaultStoreCapacity;
  if (fs::exists(root / "store.json")) capacity = read_json(root / "store.json").at("capacity").get<std::size_t>();
  auto store = std::make_unique<ReferenceStore>(Alphabet::load(root / "alphabet.txt"), capacity);

  std::vector<fs::path> dirs;
  for (const auto& d : fs::directory_iterator(root))
    if (d.is_directory() && fs::exists(d.path() / "manifest.json")) dirs.push_back(d.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const json manifest = read_json(dir / "manifest.json");
    const auto app_id = manifest.at("app_id").get<std::string>();
    check_app_id(app_id);
    AppEntries app;
    app.next_serial = manifest.at("next_serial").get<std::uint64_t>();
    for (const auto& item : manifest.at("entries")) {
      Entry e;
      e.file = item.at("file").get<std::string>();
      e.inserted_at = item.at("inserted_at").get<std::uint64_t>();
      e.sequence = load_sequence(dir / e.file, store->alphabet_).sequence;
      if (e.sequence.app_id != app_id) throw InvalidInput((dir / e.file).string() + ": app id does not match manifest");
      if (e.sequence.label != Label::legitimate)
        throw InvalidInput((dir / e.file).string() + ": stored sequence is not labelled legitimate");
      e.sequence.preprocessed = is_preprocessed(e.sequence.symbols, std::numeric_limits<std::size_t>::max());
      if (!e.sequence.preprocessed) throw InvalidInput((dir / e.file).string() + ": stored sequence has runs");
      app.items.push_back(std::move(e));
    }
    while (app.items.size() > capacity) app.items.erase(app.items.begin());
    store->apps_[app_id] = std::move(app);
  }
  store->root_ = root;
  return store;
}

std::unique_ptr<ReferenceStore> ReferenceStore::open_or_create(const fs::path& root, const Alphabet& alphabet,
                                                               std::size_t capacity) {
  if (fs::exists(root / "alphabet.txt")) {
    auto store = load(root);
    if (store->alphabet().fingerprint() != alphabet.fingerprint())
      throw InvalidInput("store at " + root.string() + " uses a different alphabet");
    return store;
  }
  auto store = std::make_unique<ReferenceStore>(alphabet, capacity);
  store->save(root);
  store->root_ = root;
  return store;
}

}  // namespace bootseq
