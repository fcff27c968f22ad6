#include "stutterbias/harness/sidecar.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "stutterbias/corpus.hpp"
#include "stutterbias/error.hpp"

extern char** environ;

namespace stutterbias::harness {

using nlohmann::json;
namespace fs = std::filesystem;

SidecarConfig sidecar_config_from_json(const json& j) {
  SidecarConfig c;
  try {
    if (j.contains("command")) {
      const auto& cmd = j.at("command");
      if (cmd.is_string()) {
        c.command = {cmd.get<std::string>()};
      } else {
        c.command = cmd.get<std::vector<std::string>>();
      }
    }
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.models = j.value("models", json::object());
    c.device = j.value("device", c.device);
  } catch (const json::exception& e) {
    throw Error(fmt::format("invalid sidecar config: {}", e.what()));
  }
  if (!(c.timeout_s > 0)) throw Error("sidecar timeout must be positive");
  return c;
}

json job_to_json(const SidecarJob& job) {
  return {{"kind", job.kind},
          {"input", job.input.string()},
          {"output_dir", job.output_dir.string()},
          {"models", job.models},
          {"device", job.device}};
}

namespace {

bool is_executable(const fs::path& p) { return ::access(p.c_str(), X_OK) == 0 && fs::is_regular_file(p); }

}  // namespace

bool sidecar_available(const SidecarConfig& config) {
  if (config.command.empty() || config.command.front().empty()) return false;
  const std::string& exe = config.command.front();
  if (exe.find('/') != std::string::npos) return is_executable(exe);
  const char* path = std::getenv("PATH");
  if (path == nullptr) return false;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (!dir.empty() && is_executable(fs::path(dir) / exe)) return true;
  }
  return false;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> rows;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
    if (!rows.back().is_object()) throw Error(fmt::format("{}:{}: not an object", path.string(), lineno));
  }
  return rows;
}

SidecarResult run_sidecar(const SidecarConfig& config, const SidecarJob& job) {
  if (config.command.empty()) throw Error("no sidecar command configured");
  fs::create_directories(job.output_dir);
  const fs::path job_path = job.output_dir / "job.json";
  const fs::path result_path = job.output_dir / "result.json";
  fs::remove(result_path);
  write_file(job_path, job_to_json(job).dump(2) + "\n");

  std::vector<std::string> args = config.command;
  args.push_back(job_path.string());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ);
  if (rc != 0) throw Error(fmt::format("cannot start sidecar '{}': {}", args[0], std::strerror(rc)));

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(config.timeout_s);
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error("lost track of the sidecar process");
    if (std::chrono::steady_clock::now() > deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw Error(fmt::format("sidecar {} job timed out after {} s", job.kind, config.timeout_s));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!WIFEXITED(status)) throw Error(fmt::format("sidecar {} job was killed", job.kind));
  if (WEXITSTATUS(status) != 0) {
    throw Error(fmt::format("sidecar {} job exited with code {}", job.kind, WEXITSTATUS(status)));
  }
  if (!fs::exists(result_path)) throw Error(fmt::format("sidecar {} job wrote no result.json", job.kind));

  SidecarResult result;
  try {
    const json j = json::parse(read_file(result_path));
    result.counts = j.value("counts", json::object());
    for (const auto& f : j.value("failures", json::array())) {
      result.failures.push_back({f.at("id").get<std::string>(), f.value("error", "")});
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed sidecar result.json: {}", e.what()));
  }
  return result;
}

}  // namespace stutterbias::harness
