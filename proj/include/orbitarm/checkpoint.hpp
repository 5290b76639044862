#pragma once
// Versioned binary checkpoints of a SAC agent.
//
// Layout (little-endian):
//   magic "ORBCKPT\0", u32 version, u32 reserved
//   string config_hash, f64 w, u64 seed
//   u32 obs_dim, u32 act_dim, f64 log_alpha, adam alpha state
//   5 networks (actor, critic 1, critic 2, target 1, target 2):
//     u32 layer count + 1, u32 sizes..., u64 parameter count, f64 params...
//   adam states (actor, critic 1, critic 2): u64 n, f64 m[n], f64 v[n], i64 step
//   string rng state
// Strings are u64 length + bytes.

#include <orbitarm/sac.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitarm {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'O', 'R', 'B', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointMeta {
  std::string config_hash;
  double w = 0.5;
  std::uint64_t seed = 0;
};

namespace detail {

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  template <typename T>
  void pod(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void doubles(const Eigen::VectorXd& v) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    os_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  template <typename T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is_) throw CheckpointError("checkpoint truncated");
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 24)) throw CheckpointError("checkpoint string too long");
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    if (!is_) throw CheckpointError("checkpoint truncated");
    return s;
  }
  Eigen::VectorXd doubles(std::uint64_t expected) {
    const auto n = pod<std::uint64_t>();
    if (n != expected)
      throw CheckpointError("checkpoint parameter count " + std::to_string(n) + " does not match expected " +
                            std::to_string(expected));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    is_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is_) throw CheckpointError("checkpoint truncated");
    return v;
  }

 private:
  std::istream& is_;
};

inline void write_net(Writer& w, const nn::Mlp& net) {
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(net.sizes().size()));
  for (int s : net.sizes()) w.pod<std::uint32_t>(static_cast<std::uint32_t>(s));
  w.doubles(net.params());
}

inline void read_net(Reader& r, nn::Mlp& net, const char* name) {
  const auto n = r.pod<std::uint32_t>();
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = static_cast<int>(r.pod<std::uint32_t>());
  if (sizes != net.sizes()) {
    std::ostringstream os;
    os << name << " shape mismatch: checkpoint [";
    for (std::size_t i = 0; i < sizes.size(); ++i) os << (i ? "," : "") << sizes[i];
    os << "], configured [";
    for (std::size_t i = 0; i < net.sizes().size(); ++i) os << (i ? "," : "") << net.sizes()[i];
    os << "]";
    throw CheckpointError(os.str());
  }
  net.params() = r.doubles(static_cast<std::uint64_t>(net.parameter_count()));
}

inline void write_adam(Writer& w, const nn::AdamState& s) {
  w.doubles(s.m);
  w.doubles(s.v);
  w.pod<std::int64_t>(s.step);
}

inline void read_adam(Reader& r, nn::AdamState& s, Eigen::Index n) {
  s.m = r.doubles(static_cast<std::uint64_t>(n));
  s.v = r.doubles(static_cast<std::uint64_t>(n));
  s.step = r.pod<std::int64_t>();
}

}  // namespace detail

inline void save_checkpoint(std::ostream& os, sac::SacAgent& agent, const CheckpointMeta& meta) {
  detail::Writer w(os);
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.pod<std::uint32_t>(0);
  w.str(meta.config_hash);
  w.pod<double>(meta.w);
  w.pod<std::uint64_t>(meta.seed);
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(agent.config().obs_dim));
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(agent.config().act_dim));
  w.pod<double>(agent.log_alpha());
  detail::write_adam(w, agent.alpha_optimizer());
  detail::write_net(w, agent.actor());
  for (int i = 0; i < 2; ++i) detail::write_net(w, agent.critic(i));
  for (int i = 0; i < 2; ++i) detail::write_net(w, agent.target(i));
  detail::write_adam(w, agent.actor_optimizer());
  for (int i = 0; i < 2; ++i) detail::write_adam(w, agent.critic_optimizer(i));
  std::ostringstream rng;
  rng << agent.rng();
  w.str(rng.str());
  if (!os) throw CheckpointError("checkpoint write failed");
}

/// Loads into an agent already constructed with the matching SacConfig.
inline CheckpointMeta load_checkpoint(std::istream& is, sac::SacAgent& agent) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw CheckpointError("not an orbitarm checkpoint");
  detail::Reader r(is);
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  r.pod<std::uint32_t>();
  CheckpointMeta meta;
  meta.config_hash = r.str();
  meta.w = r.pod<double>();
  meta.seed = r.pod<std::uint64_t>();
  const auto obs = r.pod<std::uint32_t>();
  const auto act = r.pod<std::uint32_t>();
  if (static_cast<int>(obs) != agent.config().obs_dim || static_cast<int>(act) != agent.config().act_dim)
    throw CheckpointError("checkpoint observation/action dimensions do not match");
  agent.set_log_alpha(r.pod<double>());
  detail::read_adam(r, agent.alpha_optimizer(), 1);
  detail::read_net(r, agent.actor(), "actor");
  detail::read_net(r, agent.critic(0), "critic 1");
  detail::read_net(r, agent.critic(1), "critic 2");
  detail::read_net(r, agent.target(0), "target critic 1");
  detail::read_net(r, agent.target(1), "target critic 2");
  detail::read_adam(r, agent.actor_optimizer(), agent.actor().parameter_count());
  for (int i = 0; i < 2; ++i) detail::read_adam(r, agent.critic_optimizer(i), agent.critic(i).parameter_count());
  std::istringstream rng(r.str());
  rng >> agent.rng();
  if (!rng) throw CheckpointError("checkpoint rng state is corrupt");
  return meta;
}

inline void save_checkpoint(const std::filesystem::path& path, sac::SacAgent& agent, const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open " + path.string() + " for writing");
  save_checkpoint(os, agent, meta);
}

inline CheckpointMeta load_checkpoint(const std::filesystem::path& path, sac::SacAgent& agent) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  return load_checkpoint(is, agent);
}

}  // namespace orbitarm
