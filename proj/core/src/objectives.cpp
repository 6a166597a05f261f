#include "hwml/objectives.hpp"

#include <fmt/format.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cmath>
#include <memory>
#include <numbers>

#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"
#include "hwml/rng.hpp"

namespace hwml {

double QuadraticObjective::value(std::span<const double> x) const {
  if (x.size() != center.size()) throw ConfigError("quadratic objective dimension mismatch");
  if (!scale.empty() && scale.size() != center.size()) throw ConfigError("quadratic objective scale mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - center[i]) / (scale.empty() ? 1.0 : scale[i]);
    s += d * d;
  }
  return s;
}

Objective QuadraticObjective::bind() const {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [self = *this, counter](std::span<const double> x) -> std::optional<double> {
    double y = self.value(x);
    const std::uint64_t index = (*counter)++;
    if (self.noise_stddev > 0.0) y += self.noise_stddev * Rng(derive_seed(self.seed, index)).normal();
    return y;
  };
}

double branin_unit(std::span<const double> u) {
  if (u.size() != 2) throw ConfigError("branin is two-dimensional");
  const double x1 = 15.0 * u[0] - 5.0;
  const double x2 = 15.0 * u[1];
  const double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
  const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

std::optional<double> CommandObjective::value(std::span<const double> x) const {
  std::string line;
  for (std::size_t i = 0; i < x.size(); ++i) line += (i ? "," : "") + fmt::format("{}", x[i]);
  line += "\n";

  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) return std::nullopt;
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    return std::nullopt;
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    return std::nullopt;
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  int write_fd = to_child[1], read_fd = from_child[0];
  ::close(to_child[0]);
  ::close(from_child[1]);

  // The child may exit without reading stdin.
  auto* old = std::signal(SIGPIPE, SIG_IGN);
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::write(write_fd, line.data() + off, line.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    off += static_cast<std::size_t>(n);
  }
  close_fd(write_fd);
  std::signal(SIGPIPE, old);

  std::string output;
  char buf[4096];
  while (true) {
    const ssize_t n = ::read(read_fd, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  close_fd(read_fd);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return std::nullopt;
  try {
    const double y = parse_double(trim(output));
    if (!std::isfinite(y)) return std::nullopt;
    return y;
  } catch (const ConfigError&) {
    return std::nullopt;
  }
}

Objective CommandObjective::bind() const {
  return [self = *this](std::span<const double> x) { return self.value(x); };
}

}  // namespace hwml
