#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "ppgpt/common/error.hpp"
#include "ppgpt/smt/solver.hpp"

namespace ppgpt::smt {

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input, int timeout_ms) {
  static const bool sigpipe_ignored = (signal(SIGPIPE, SIG_IGN), true);
  (void)sigpipe_ignored;
  int in[2], out[2], err[2];
  if (pipe(in) || pipe(out) || pipe(err)) throw SolverError(std::string("pipe: ") + std::strerror(errno));
  pid_t pid = fork();
  if (pid < 0) throw SolverError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(in[0], 0);
    dup2(out[1], 1);
    dup2(err[1], 2);
    for (int fd : {in[0], in[1], out[0], out[1], err[0], err[1]}) close(fd);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(in[0]);
  close(out[1]);
  close(err[1]);
  fcntl(in[1], F_SETFL, O_NONBLOCK);

  ProcessResult res;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  size_t written = 0;
  int wfd = in[1];
  if (input.empty()) {
    close(wfd);
    wfd = -1;
  }
  bool out_open = true, err_open = true;
  char buf[65536];
  while (out_open || err_open) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      res.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    pollfd fds[3];
    int n = 0;
    int iw = -1, io = -1, ie = -1;
    if (wfd >= 0) fds[iw = n++] = {wfd, POLLOUT, 0};
    if (out_open) fds[io = n++] = {out[0], POLLIN, 0};
    if (err_open) fds[ie = n++] = {err[0], POLLIN, 0};
    int rc = poll(fds, n, static_cast<int>(left));
    if (rc < 0) {
      if (errno == EINTR) continue;
      kill(pid, SIGKILL);
      break;
    }
    if (iw >= 0 && fds[iw].revents) {
      ssize_t k = write(wfd, input.data() + written, input.size() - written);
      if (k > 0) written += static_cast<size_t>(k);
      if (k < 0 && errno != EAGAIN) written = input.size();
      if (written >= input.size()) {
        close(wfd);
        wfd = -1;
      }
    }
    if (io >= 0 && fds[io].revents) {
      ssize_t k = read(out[0], buf, sizeof buf);
      if (k > 0) res.out.append(buf, static_cast<size_t>(k));
      else out_open = false;
    }
    if (ie >= 0 && fds[ie].revents) {
      ssize_t k = read(err[0], buf, sizeof buf);
      if (k > 0) res.err.append(buf, static_cast<size_t>(k));
      else err_open = false;
    }
  }
  if (wfd >= 0) close(wfd);
  close(out[0]);
  close(err[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  if (res.exit_code == 127 && res.out.empty()) throw SolverError("cannot execute '" + argv[0] + "'");
  return res;
}

}  // namespace ppgpt::smt
