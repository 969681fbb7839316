#include "mobo/oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_set>

#include "mobo/errors.hpp"

namespace mobo {

namespace {

constexpr std::array<double, 6> kCentreA = {0.21, 0.34, 0.27, 0.18, 0.3, 0.25};
constexpr std::array<double, 6> kCentreB = {0.79, 0.62, 0.71, 0.83, 0.66, 0.74};

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

struct ProcessResult {
  std::string out;
  std::string err;
  int status = 0;
  bool timed_out = false;
};

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input, double timeout) {
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe(in_pipe) != 0) throw OracleError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw OracleError(std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe(err_pipe) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw OracleError(std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw OracleError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    ::execvp(args[0], args.data());
    const std::string msg = std::string("cannot execute ") + args[0] + ": " + std::strerror(errno) + "\n";
    [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg.data(), msg.size());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int wfd = in_pipe[1], ofd = out_pipe[0], efd = err_pipe[0];
  ::fcntl(wfd, F_SETFL, ::fcntl(wfd, F_GETFL) | O_NONBLOCK);
  ::signal(SIGPIPE, SIG_IGN);

  ProcessResult res;
  std::size_t written = 0;
  if (input.empty()) close_fd(wfd);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
  char buf[65536];
  while (ofd >= 0 || efd >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      res.timed_out = true;
      break;
    }
    std::vector<pollfd> fds;
    if (wfd >= 0) fds.push_back({wfd, POLLOUT, 0});
    if (ofd >= 0) fds.push_back({ofd, POLLIN, 0});
    if (efd >= 0) fds.push_back({efd, POLLIN, 0});
    const int rc = ::poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (const auto& p : fds) {
      if (!p.revents) continue;
      if (p.fd == wfd) {
        if (p.revents & (POLLERR | POLLHUP)) {
          close_fd(wfd);
          continue;
        }
        const ssize_t n = ::write(wfd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        else if (n < 0 && errno != EAGAIN && errno != EINTR) close_fd(wfd);
        if (written == input.size()) close_fd(wfd);
      } else {
        const ssize_t n = ::read(p.fd, buf, sizeof(buf));
        if (n > 0) {
          (p.fd == ofd ? res.out : res.err).append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
          if (p.fd == ofd) close_fd(ofd);
          else close_fd(efd);
        }
      }
    }
  }
  close_fd(wfd);
  close_fd(ofd);
  close_fd(efd);
  if (res.timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  res.status = status;
  return res;
}

}  // namespace

BuiltinOracle::BuiltinOracle(std::string name, std::size_t num_vars) : name_(std::move(name)), num_vars_(num_vars) {
  if (name_ != "sphere_pair" && name_ != "zdt1_discrete" && name_ != "linear_tradeoff")
    throw InvalidInput("unknown builtin oracle '" + name_ + "' (expected sphere_pair, zdt1_discrete or linear_tradeoff)");
  if (name_ == "sphere_pair" && (num_vars_ == 0 || num_vars_ > kCentreA.size()))
    throw InvalidInput("sphere_pair supports 1 to 6 variables");
  if (name_ == "zdt1_discrete" && num_vars_ < 2) throw InvalidInput("zdt1_discrete needs at least 2 variables");
}

ObjectiveVector BuiltinOracle::evaluate_genome(const std::string& genome) const {
  for (char c : genome)
    if (c != '0' && c != '1') throw OracleError("builtin oracle " + name_ + " needs bitstring genomes", genome);
  if (name_ == "linear_tradeoff") {
    if (genome.empty()) throw OracleError("empty genome");
    const auto ones = static_cast<double>(std::count(genome.begin(), genome.end(), '1'));
    const auto b = static_cast<double>(genome.size());
    return {ones / b, (b - ones) / b};
  }
  std::vector<double> x;
  try {
    x = decode_fixed_point(genome, num_vars_);
  } catch (const InvalidInput& e) {
    throw OracleError(e.what(), genome);
  }
  if (name_ == "sphere_pair") {
    double da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      da += (x[i] - kCentreA[i]) * (x[i] - kCentreA[i]);
      db += (x[i] - kCentreB[i]) * (x[i] - kCentreB[i]);
    }
    return {-da, -db};
  }
  const double f1 = x[0];
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i];
  const double g = 1.0 + 9.0 * tail / static_cast<double>(x.size() - 1);
  const double f2 = g * (1.0 - std::sqrt(f1 / g));
  return {0.0 - f1, 0.0 - f2};
}

std::vector<ObjectiveVector> BuiltinOracle::evaluate(const std::vector<Candidate>& batch) const {
  std::vector<ObjectiveVector> out;
  out.reserve(batch.size());
  for (const auto& c : batch) out.push_back(evaluate_genome(c.genome));
  return out;
}

TableOracle::TableOracle(const Pool& pool) : m_(pool.num_objectives) {
  if (!pool.labeled()) throw InvalidInput("table oracle needs a labeled pool");
  for (const auto& c : pool.candidates) labels_.emplace(c.key, *c.labels);
}

std::vector<ObjectiveVector> TableOracle::evaluate(const std::vector<Candidate>& batch) const {
  std::vector<ObjectiveVector> out;
  out.reserve(batch.size());
  for (const auto& c : batch) {
    const auto it = labels_.find(c.key);
    if (it == labels_.end()) throw OracleError("candidate " + c.id + " is not in the labeled table", c.genome);
    out.push_back(it->second);
  }
  return out;
}

ExternalOracle::ExternalOracle(std::vector<std::string> argv, std::size_t m, double timeout)
    : argv_(std::move(argv)), m_(m), timeout_(timeout) {
  if (argv_.empty() || argv_.front().empty()) throw InvalidInput("external oracle command is empty");
  if (m_ == 0) throw InvalidInput("external oracle needs at least one objective");
  if (!(timeout_ > 0.0)) throw InvalidInput("external oracle timeout must be positive");
}

std::string ExternalOracle::name() const {
  std::string s;
  for (const auto& a : argv_) s += (s.empty() ? "" : " ") + a;
  return s;
}

std::vector<ObjectiveVector> ExternalOracle::evaluate(const std::vector<Candidate>& batch) const {
  std::string input;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& c = batch[i];
    if (!slot.emplace(c.id, i).second) throw OracleError("batch repeats candidate id " + c.id);
    nlohmann::json req = {{"id", c.id}, {"genome", c.genome},
                          {"features", std::vector<double>(c.features.data(), c.features.data() + c.features.size())}};
    input += req.dump() + '\n';
  }
  const auto res = run_process(argv_, input, timeout_);
  const std::string raw = res.out + (res.err.empty() ? "" : "\n[stderr]\n" + res.err);
  if (res.timed_out)
    throw OracleError("external oracle timed out after " + std::to_string(timeout_) + " s", raw);
  if (!WIFEXITED(res.status) || WEXITSTATUS(res.status) != 0) {
    const std::string how = WIFEXITED(res.status) ? "exited with status " + std::to_string(WEXITSTATUS(res.status))
                                                  : "was killed by signal " + std::to_string(WTERMSIG(res.status));
    throw OracleError("external oracle " + how, raw);
  }

  std::vector<ObjectiveVector> out(batch.size());
  std::vector<char> seen(batch.size(), 0);
  std::istringstream lines(res.out);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw OracleError(std::string("malformed oracle response: ") + e.what(), raw);
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("objectives") ||
        !j["objectives"].is_array())
      throw OracleError("oracle response needs a string \"id\" and an \"objectives\" array: " + line, raw);
    const auto it = slot.find(j["id"].get<std::string>());
    if (it == slot.end()) throw OracleError("oracle answered unknown id " + j["id"].get<std::string>(), raw);
    if (seen[it->second]) throw OracleError("oracle answered id " + it->first + " twice", raw);
    ObjectiveVector y;
    for (const auto& v : j["objectives"]) {
      if (!v.is_number()) throw OracleError("non-numeric objective for id " + it->first, raw);
      y.push_back(v.get<double>());
    }
    out[it->second] = std::move(y);
    seen[it->second] = 1;
  }
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (!seen[i]) throw OracleError("oracle gave no result for id " + batch[i].id, raw);
  return out;
}

std::unique_ptr<Oracle> make_oracle(const nlohmann::json& spec, std::size_t num_objectives, const Pool* pool) {
  std::unique_ptr<Oracle> o;
  try {
    const auto kind = spec.value("kind", std::string("builtin"));
    if (kind == "builtin") {
      o = std::make_unique<BuiltinOracle>(spec.at("name").get<std::string>(), spec.value("num_vars", std::size_t{4}));
    } else if (kind == "table") {
      if (!pool || !pool->labeled()) throw InvalidInput("oracle.kind table needs a labeled static pool");
      o = std::make_unique<TableOracle>(*pool);
    } else if (kind == "external") {
      std::vector<std::string> argv;
      const auto& cmd = spec.at("command");
      if (cmd.is_string()) argv = {"/bin/sh", "-c", cmd.get<std::string>()};
      else argv = cmd.get<std::vector<std::string>>();
      o = std::make_unique<ExternalOracle>(std::move(argv), num_objectives, spec.value("timeout_s", 300.0));
    } else {
      throw InvalidInput("oracle.kind must be builtin, table or external");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("oracle: ") + e.what());
  }
  if (o->num_objectives() != num_objectives)
    throw InvalidInput("oracle " + o->name() + " has " + std::to_string(o->num_objectives()) +
                       " objectives but M = " + std::to_string(num_objectives));
  return o;
}

std::vector<ObjectiveVector> evaluate_oracle(const Oracle& oracle, const std::vector<Candidate>& batch) {
  if (batch.empty()) throw InvalidInput("oracle batch is empty");
  auto ys = oracle.evaluate(batch);
  if (ys.size() != batch.size())
    throw OracleError("oracle returned " + std::to_string(ys.size()) + " results for " + std::to_string(batch.size()) +
                      " candidates");
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i].size() != oracle.num_objectives())
      throw OracleError("oracle returned " + std::to_string(ys[i].size()) + " objectives for " + batch[i].id +
                        ", expected " + std::to_string(oracle.num_objectives()));
    for (double v : ys[i])
      if (!std::isfinite(v)) throw OracleError("oracle returned a non-finite objective for " + batch[i].id);
  }
  return ys;
}

}  // namespace mobo
