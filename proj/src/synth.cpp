#include "bootseq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bootseq/error.hpp"
#include "bootseq/rng.hpp"

namespace bootseq::synth {

namespace fs = std::filesystem;

std::span<const std::string> default_syscalls() {
  static const std::vector<std::string> names = {
      "read",       "write",        "openat",      "close",         "fstat",        "newfstatat",  "lseek",
      "mmap",       "mprotect",     "munmap",      "brk",           "rt_sigaction", "rt_sigprocmask",
      "ioctl",      "pread64",      "pwrite64",    "readv",         "writev",       "faccessat",   "pipe2",
      "sched_yield", "mremap",      "msync",       "madvise",       "dup",          "dup3",        "nanosleep",
      "getpid",     "socket",       "connect",     "accept4",       "sendto",       "recvfrom",    "sendmsg",
      "recvmsg",    "shutdown",     "bind",        "listen",        "getsockname",  "getpeername", "socketpair",
      "setsockopt", "getsockopt",   "clone",       "execve",        "exit",         "wait4",       "kill",
      "uname",      "fcntl",        "flock",       "fsync",         "fdatasync",    "truncate",    "ftruncate",
      "getdents64", "getcwd",       "chdir",       "renameat",      "mkdirat",      "unlinkat",    "symlinkat",
      "readlinkat", "fchmodat",     "fchownat",    "umask",         "gettimeofday", "getrlimit",   "getrusage",
      "sysinfo",    "getuid",       "getgid",      "geteuid",       "getegid",      "setpgid",     "getppid",
      "setsid",     "prctl",        "futex",       "epoll_create1", "epoll_ctl",    "epoll_pwait", "set_tid_address",
      "clock_gettime", "clock_nanosleep", "exit_group", "tgkill",   "inotify_add_watch", "eventfd2", "timerfd_create",
      "timerfd_settime", "signalfd4", "getrandom",  "memfd_create",  "statx",        "ppoll",       "pselect6",
  };
  return names;
}

Alphabet default_alphabet() { return build_alphabet(default_syscalls()); }

void NoiseModel::validate() const {
  auto rate = [](double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput(std::string(what) + " must lie in [0, 1]");
  };
  rate(substitution_rate, "substitution_rate");
  rate(insertion_rate, "insertion_rate");
  rate(deletion_rate, "deletion_rate");
  rate(device_jitter, "device_jitter");
  if (jitter_block == 0) throw InvalidInput("jitter_block must be positive");
  if (jitter_variants == 0) throw InvalidInput("jitter_variants must be positive");
}

namespace {

// Draws an index with probability proportional to weights (prefix sums given).
std::size_t weighted(rng::Engine& g, const std::vector<double>& cumulative) {
  const double u = rng::unit(g) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> zipf(std::size_t n, double exponent) {
  std::vector<double> c(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += 1.0 / std::pow(static_cast<double>(k + 1), exponent);
    c[k] = total;
  }
  return c;
}

Symbol random_symbol(rng::Engine& g, std::size_t alphabet_size) {
  return static_cast<Symbol>(1 + rng::index(g, alphabet_size - 1));
}

}  // namespace

AppProfile gen_profile(const std::string& app_id, std::size_t length, const Alphabet& alphabet, std::uint64_t seed,
                       const NoiseModel& noise) {
  if (length == 0) throw InvalidInput("profile length must be at least 1");
  if (alphabet.size() < 2) throw InvalidInput("profile alphabet needs at least one known syscall");
  noise.validate();
  const std::size_t l = alphabet.size();
  AppProfile p;
  p.app_id = app_id;
  p.alphabet_id = alphabet.fingerprint();
  p.seed = rng::mix(seed, rng::fnv1a(app_id));
  rng::Engine g(p.seed);

  // App-specific popularity order over the known symbols.
  std::vector<Symbol> order(l - 1);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Symbol>(i + 1);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng::index(g, i)]);
  const auto symbol_weights = zipf(order.size(), 1.1);

  // Short motifs reused along the boot, giving it loops and repeated phases.
  const std::size_t motif_count = 32;
  std::vector<std::vector<Symbol>> motifs(motif_count);
  for (auto& m : motifs) {
    m.resize(3 + rng::index(g, 6));
    for (auto& s : m) s = order[weighted(g, symbol_weights)];
  }
  const auto motif_weights = zipf(motif_count, 0.8);

  while (p.base.size() < length) {
    for (Symbol s : motifs[weighted(g, motif_weights)]) {
      const std::size_t run = rng::bernoulli(g, 0.25) ? 2 + rng::index(g, 3) : 1;
      for (std::size_t r = 0; r < run && p.base.size() < length; ++r) p.base.push_back(s);
    }
  }

  const std::size_t block = noise.jitter_block;
  const auto sites = static_cast<std::size_t>(noise.device_jitter * static_cast<double>(length) /
                                              static_cast<double>(block));
  if (sites > 0 && noise.jitter_variants > 1) {
    const std::size_t stride = length / sites;
    for (std::size_t k = 0; k < sites; ++k) {
      JitterSite site;
      site.start = k * stride + rng::index(g, stride - block + 1);
      site.variants.emplace_back(p.base.begin() + static_cast<std::ptrdiff_t>(site.start),
                                 p.base.begin() + static_cast<std::ptrdiff_t>(site.start + block));
      for (std::size_t v = 1; v < noise.jitter_variants; ++v) {
        auto& alt = site.variants.emplace_back(block);
        for (auto& s : alt) s = random_symbol(g, l);
      }
      p.sites.push_back(std::move(site));
    }
  }
  return p;
}

BootSequence gen_boot(const AppProfile& profile, const NoiseModel& noise, const std::string& device_id,
                      std::uint64_t sample_seed, std::size_t alphabet_size, std::size_t max_len) {
  noise.validate();
  if (alphabet_size < 2) throw InvalidInput("alphabet needs at least one known syscall");
  const std::uint64_t device = rng::mix(profile.seed, rng::fnv1a(device_id));

  std::vector<Symbol> raw = profile.base;
  for (std::size_t k = 0; k < profile.sites.size(); ++k) {
    const auto& site = profile.sites[k];
    const auto& variant = site.variants[rng::mix(device, k) % site.variants.size()];
    std::copy(variant.begin(), variant.end(), raw.begin() + static_cast<std::ptrdiff_t>(site.start));
  }

  rng::Engine g(rng::mix(device, sample_seed));
  std::vector<Symbol> out;
  out.reserve(raw.size() + raw.size() / 16);
  const std::size_t l = alphabet_size;
  for (Symbol s : raw) {
    if (rng::bernoulli(g, noise.deletion_rate)) continue;
    if (l > 2 && rng::bernoulli(g, noise.substitution_rate)) {
      // Uniform over the other known symbols.
      auto r = static_cast<Symbol>(1 + rng::index(g, l - 2));
      if (r >= s) ++r;
      s = r;
    }
    out.push_back(s);
    if (rng::bernoulli(g, noise.insertion_rate)) out.push_back(random_symbol(g, l));
  }

  BootSequence b;
  b.app_id = profile.app_id;
  b.device_id = device_id;
  b.label = Label::legitimate;
  b.symbols = std::move(out);
  b.alphabet_id = profile.alphabet_id;
  return preprocess(std::move(b), max_len);
}

BootSequence inject_payload(const BootSequence& boot, const PayloadSpec& spec, std::size_t max_len) {
  if (spec.payload.empty()) throw InvalidInput("payload is empty");
  if (!(spec.insert_after >= 0.0 && spec.insert_after <= 1.0)) throw InvalidInput("insert_after must lie in [0, 1]");
  if (!boot.preprocessed) throw InvalidInput("boot must be preprocessed before payload injection");
  const auto at = static_cast<std::size_t>(std::floor(spec.insert_after * static_cast<double>(boot.size())));
  BootSequence out = boot;
  out.symbols.insert(out.symbols.begin() + static_cast<std::ptrdiff_t>(std::min(at, boot.size())),
                     spec.payload.begin(), spec.payload.end());
  out.label = Label::malicious;
  out.preprocessed = false;
  return preprocess(std::move(out), max_len);
}

std::vector<Symbol> gen_payload(std::size_t length, std::size_t alphabet_size, std::uint64_t seed) {
  if (length == 0) throw InvalidInput("payload length must be at least 1");
  if (alphabet_size < 3) throw InvalidInput("payload needs at least two known syscalls");
  rng::Engine g(seed);
  std::vector<Symbol> p;
  p.reserve(length);
  while (p.size() < length) {
    const Symbol s = random_symbol(g, alphabet_size);
    if (p.empty() || p.back() != s) p.push_back(s);
  }
  return p;
}

void CorpusSpec::validate() const {
  noise.validate();
  if (apps == 0) throw InvalidInput("corpus needs at least one app");
  if (legitimate_per_app == 0) throw InvalidInput("corpus needs legitimate samples");
  if (samples_per_device == 0) throw InvalidInput("samples_per_device must be positive");
  if (profile_length == 0) throw InvalidInput("profile_length must be positive");
  if (max_len == 0) throw InvalidInput("max_len must be positive");
  if (!(payload_fraction > 0.0)) throw InvalidInput("payload_fraction must be positive");
  if (!(insert_after >= 0.0 && insert_after <= 1.0)) throw InvalidInput("insert_after must lie in [0, 1]");
}

CorpusSpec CorpusSpec::preset(const std::string& name) {
  CorpusSpec s;
  if (name == "small") return s;
  if (name == "full") {
    s.apps = 19;
    s.legitimate_per_app = 150;
    s.malicious_per_app = 150;
    return s;
  }
  throw InvalidInput("unknown corpus preset '" + name + "' (expected small or full)");
}

nlohmann::ordered_json CorpusSpec::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["apps"] = apps;
  j["legitimate_per_app"] = legitimate_per_app;
  j["malicious_per_app"] = malicious_per_app;
  j["samples_per_device"] = samples_per_device;
  j["profile_length"] = profile_length;
  j["max_len"] = max_len;
  j["noise"] = {{"substitution_rate", noise.substitution_rate}, {"insertion_rate", noise.insertion_rate},
                {"deletion_rate", noise.deletion_rate},         {"device_jitter", noise.device_jitter},
                {"jitter_block", noise.jitter_block},           {"jitter_variants", noise.jitter_variants}};
  j["payload"] = {{"fraction", payload_fraction}, {"insert_after", insert_after}};
  return j;
}

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
  CorpusSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.apps = j.value("apps", s.apps);
    s.legitimate_per_app = j.value("legitimate_per_app", s.legitimate_per_app);
    s.malicious_per_app = j.value("malicious_per_app", s.malicious_per_app);
    s.samples_per_device = j.value("samples_per_device", s.samples_per_device);
    s.profile_length = j.value("profile_length", s.profile_length);
    s.max_len = j.value("max_len", s.max_len);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      s.noise.substitution_rate = n.value("substitution_rate", s.noise.substitution_rate);
      s.noise.insertion_rate = n.value("insertion_rate", s.noise.insertion_rate);
      s.noise.deletion_rate = n.value("deletion_rate", s.noise.deletion_rate);
      s.noise.device_jitter = n.value("device_jitter", s.noise.device_jitter);
      s.noise.jitter_block = n.value("jitter_block", s.noise.jitter_block);
      s.noise.jitter_variants = n.value("jitter_variants", s.noise.jitter_variants);
    }
    if (j.contains("payload")) {
      s.payload_fraction = j.at("payload").value("fraction", s.payload_fraction);
      s.insert_after = j.at("payload").value("insert_after", s.insert_after);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("corpus spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string app_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "app%02zu", index);
  return buf;
}

std::string device_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "dev%03zu", index);
  return buf;
}

Corpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Corpus c{spec, default_alphabet(), {}};
  const std::size_t l = c.alphabet.size();
  const std::size_t legit_devices = (spec.legitimate_per_app + spec.samples_per_device - 1) / spec.samples_per_device;
  for (std::size_t a = 0; a < spec.apps; ++a) {
    AppSamples app;
    app.app_id = app_name(a);
    const AppProfile profile = gen_profile(app.app_id, spec.profile_length, c.alphabet, spec.seed, spec.noise);
    for (std::size_t i = 0; i < spec.legitimate_per_app; ++i)
      app.legitimate.push_back(gen_boot(profile, spec.noise, device_name(i / spec.samples_per_device),
                                        rng::mix(profile.seed, 2 * i), l, spec.max_len));
    if (spec.malicious_per_app > 0) {
      const std::size_t nominal = std::min(spec.max_len, collapse_repeats(profile.base).size());
      const auto length = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(spec.payload_fraction * static_cast<double>(nominal))));
      const PayloadSpec payload{gen_payload(length, l, rng::mix(profile.seed, 0x7061796c6f6164ULL)),
                                spec.insert_after};
      for (std::size_t i = 0; i < spec.malicious_per_app; ++i) {
        const auto boot = gen_boot(profile, spec.noise, device_name(legit_devices + i / spec.samples_per_device),
                                   rng::mix(profile.seed, 2 * i + 1), l, spec.max_len);
        app.malicious.push_back(inject_payload(boot, payload, spec.max_len));
      }
    }
    c.apps.push_back(std::move(app));
  }
  return c;
}

void write_corpus(const Corpus& corpus, const fs::path& out) {
  fs::create_directories(out);
  corpus.alphabet.save(out / "alphabet.txt");
  nlohmann::ordered_json manifest;
  manifest["format"] = "bootseq-corpus/1";
  manifest["spec"] = corpus.spec.to_json();
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(corpus.alphabet.fingerprint()));
  manifest["alphabet"] = {{"file", "alphabet.txt"}, {"fingerprint", fp}};
  manifest["layout"] = "<app>/<label>/NNN.seq";
  auto& apps = manifest["apps"] = nlohmann::ordered_json::array();
  for (const auto& app : corpus.apps) {
    auto dump = [&](const std::vector<BootSequence>& seqs, const char* label) {
      const fs::path dir = out / app.app_id / label;
      fs::create_directories(dir);
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%03zu.seq", i);
        save_sequence(dir / name, seqs[i], corpus.alphabet);
      }
    };
    dump(app.legitimate, "legitimate");
    dump(app.malicious, "malicious");
    apps.push_back(
        {{"app_id", app.app_id}, {"legitimate", app.legitimate.size()}, {"malicious", app.malicious.size()}});
  }
  std::ofstream f(out / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + (out / "manifest.json").string());
  f << manifest.dump(2) << '\n';
}

}  // namespace bootseq::synth
