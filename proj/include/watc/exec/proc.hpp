// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "watc/errors.hpp"

namespace watc::exec {

struct RunSpec {
    std::vector<std::string> argv;
    std::string stdin_bytes;
    double timeout_seconds = 10.0;
    std::string cwd;  // empty: inherit
};

struct RunOutcome {
    bool started = false;    // exec itself succeeded
    bool exited = false;     // normal exit, not signal death
    int exit_code = -1;      // valid when exited
    int term_signal = 0;     // valid when !exited
    bool timed_out = false;
    std::string stdout_bytes;
    std::string stderr_bytes;
    double wall_seconds = 0.0;
};

/// Expands `{key}` tokens inside each word of a whitespace-split command
/// template. Substituted values must not contain spaces; scratch paths are
/// under the caller's control, so that holds by construction.
inline std::vector<std::string> expand_template(const std::string& command_template,
                                                const std::map<std::string, std::string>& values) {
    std::vector<std::string> argv;
    std::string word;
    auto flush = [&]() {
        if (word.empty()) return;
        std::string out;
        std::size_t i = 0;
        while (i < word.size()) {
            if (word[i] == '{') {
                std::size_t close = word.find('}', i);
                if (close != std::string::npos) {
                    std::string key = word.substr(i + 1, close - i - 1);
                    auto it = values.find(key);
                    if (it != values.end()) {
                        out += it->second;
                        i = close + 1;
                        continue;
                    }
                }
            }
            out += word[i++];
        }
        argv.push_back(out);
        word.clear();
    };
    for (char ch : command_template) {
        if (ch == ' ' || ch == '\t') flush();
        else word += ch;
    }
    flush();
    return argv;
}

/// True when the command resolves to an executable, by absolute/relative path
/// or through PATH.
inline bool command_exists(const std::string& cmd) {
    if (cmd.empty()) return false;
    if (cmd.find('/') != std::string::npos) return ::access(cmd.c_str(), X_OK) == 0;
    const char* path = std::getenv("PATH");
    if (!path) return false;
    std::string dirs = path;
    std::size_t start = 0;
    while (start <= dirs.size()) {
        std::size_t end = dirs.find(':', start);
        if (end == std::string::npos) end = dirs.size();
        std::string dir = dirs.substr(start, end - start);
        if (!dir.empty() && ::access((dir + "/" + cmd).c_str(), X_OK) == 0) return true;
        start = end + 1;
    }
    return false;
}

namespace detail {

inline void close_quiet(int fd) {
    if (fd >= 0) ::close(fd);
}

}  // namespace detail

/// Runs one child process with captured output and a hard wall-clock limit.
/// The child gets its own process group so a timeout kills helpers too.
inline RunOutcome run_process(const RunSpec& spec) {
    RunOutcome outcome;
    if (spec.argv.empty()) return outcome;

    int in_pipe[2] = {-1, -1}, out_pipe[2] = {-1, -1}, err_pipe[2] = {-1, -1};
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
        detail::close_quiet(in_pipe[0]);
        detail::close_quiet(in_pipe[1]);
        detail::close_quiet(out_pipe[0]);
        detail::close_quiet(out_pipe[1]);
        return outcome;
    }

    auto started_at = std::chrono::steady_clock::now();
    pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
            detail::close_quiet(fd);
        return outcome;
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
            detail::close_quiet(fd);
        if (!spec.cwd.empty() && ::chdir(spec.cwd.c_str()) != 0) ::_exit(127);
        std::vector<char*> argv;
        for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }

    detail::close_quiet(in_pipe[0]);
    detail::close_quiet(out_pipe[1]);
    detail::close_quiet(err_pipe[1]);
    ::fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    ::fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    // Stdin is small for every harness use; write it up front and close so
    // the child sees EOF. SIGPIPE from an uninterested child is harmless.
    signal(SIGPIPE, SIG_IGN);
    std::size_t written = 0;
    while (written < spec.stdin_bytes.size()) {
        ssize_t n = ::write(in_pipe[1], spec.stdin_bytes.data() + written,
                            spec.stdin_bytes.size() - written);
        if (n <= 0) break;
        written += static_cast<std::size_t>(n);
    }
    detail::close_quiet(in_pipe[1]);

    auto deadline = started_at + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>(spec.timeout_seconds));
    bool out_open = true, err_open = true;
    while (out_open || err_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            outcome.timed_out = true;
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            break;
        }
        struct pollfd fds[2];
        nfds_t nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        if (wait_ms < 1) wait_ms = 1;
        if (wait_ms > 200) wait_ms = 200;
        int ready = ::poll(fds, nfds, wait_ms);
        if (ready < 0 && errno != EINTR) break;
        char buf[4096];
        auto drain = [&](int fd, bool& open_flag, std::string& sink) {
            for (;;) {
                ssize_t n = ::read(fd, buf, sizeof buf);
                if (n > 0) {
                    sink.append(buf, static_cast<std::size_t>(n));
                } else if (n == 0) {
                    open_flag = false;
                    return;
                } else {
                    return;  // EAGAIN or transient error; poll again
                }
            }
        };
        if (out_open) drain(out_pipe[0], out_open, outcome.stdout_bytes);
        if (err_open) drain(err_pipe[0], err_open, outcome.stderr_bytes);
    }
    detail::close_quiet(out_pipe[0]);
    detail::close_quiet(err_pipe[0]);

    int status = 0;
    ::waitpid(pid, &status, 0);
    outcome.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_at).count();
    if (WIFEXITED(status)) {
        outcome.exited = true;
        outcome.exit_code = WEXITSTATUS(status);
        outcome.started = outcome.exit_code != 127;
    } else if (WIFSIGNALED(status)) {
        outcome.exited = false;
        outcome.term_signal = WTERMSIG(status);
        outcome.started = true;
    }
    if (outcome.timed_out) outcome.exited = false;
    return outcome;
}

}  // namespace watc::exec
