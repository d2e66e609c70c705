/*
 * LD_PRELOAD interposer asserting the scanner's no-execution guarantee:
 * no process spawn, no network dial, no write-mode file opens, no file
 * mutation while scanning. Violations print NOEXEC-VIOLATION lines to stderr
 * and the offending call is refused.
 *
 * Thread creation (pthread_create/clone) is deliberately not intercepted:
 * parallel scan workers are part of the contract.
 */
#define _GNU_SOURCE
#include <dlfcn.h>
#include <errno.h>
#include <fcntl.h>
#include <stdarg.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <unistd.h>

static void report(const char* what) {
    /* write(2) directly: no allocation, no locale machinery */
    char buf[128];
    int n = snprintf(buf, sizeof buf, "NOEXEC-VIOLATION: %s\n", what);
    if (n > 0) {
        ssize_t ignored = write(2, buf, (size_t)n);
        (void)ignored;
    }
}

/* ---- process spawning ---- */

int system(const char* cmd) {
    (void)cmd;
    report("system");
    return -1;
}

FILE* popen(const char* cmd, const char* mode) {
    (void)cmd;
    (void)mode;
    report("popen");
    errno = EACCES;
    return NULL;
}

int execve(const char* path, char* const argv[], char* const envp[]) {
    (void)path;
    (void)argv;
    (void)envp;
    report("execve");
    errno = EACCES;
    return -1;
}

int execv(const char* path, char* const argv[]) {
    (void)path;
    (void)argv;
    report("execv");
    errno = EACCES;
    return -1;
}

int execvp(const char* file, char* const argv[]) {
    (void)file;
    (void)argv;
    report("execvp");
    errno = EACCES;
    return -1;
}

int execvpe(const char* file, char* const argv[], char* const envp[]) {
    (void)file;
    (void)argv;
    (void)envp;
    report("execvpe");
    errno = EACCES;
    return -1;
}

int execl(const char* path, const char* arg, ...) {
    (void)path;
    (void)arg;
    report("execl");
    errno = EACCES;
    return -1;
}

int execlp(const char* file, const char* arg, ...) {
    (void)file;
    (void)arg;
    report("execlp");
    errno = EACCES;
    return -1;
}

int posix_spawn(pid_t* pid, const char* path, const void* fa, const void* attr,
                char* const argv[], char* const envp[]) {
    (void)pid;
    (void)path;
    (void)fa;
    (void)attr;
    (void)argv;
    (void)envp;
    report("posix_spawn");
    return EACCES;
}

int posix_spawnp(pid_t* pid, const char* file, const void* fa, const void* attr,
                 char* const argv[], char* const envp[]) {
    (void)pid;
    (void)file;
    (void)fa;
    (void)attr;
    (void)argv;
    (void)envp;
    report("posix_spawnp");
    return EACCES;
}

pid_t fork(void) {
    report("fork");
    errno = EAGAIN;
    return -1;
}

pid_t vfork(void) {
    report("vfork");
    errno = EAGAIN;
    return -1;
}

/* ---- network ---- */

int socket(int domain, int type, int protocol) {
    (void)domain;
    (void)type;
    (void)protocol;
    report("socket");
    errno = EACCES;
    return -1;
}

int connect(int fd, const void* addr, unsigned len) {
    (void)fd;
    (void)addr;
    (void)len;
    report("connect");
    errno = EACCES;
    return -1;
}

/* ---- write-mode file access ---- */

#define WRITE_FLAGS (O_WRONLY | O_RDWR | O_CREAT | O_TRUNC | O_APPEND)

typedef int (*open_fn)(const char*, int, ...);
typedef int (*openat_fn)(int, const char*, int, ...);
typedef FILE* (*fopen_fn)(const char*, const char*);

int open(const char* path, int flags, ...) {
    if (flags & WRITE_FLAGS) {
        report("open(write)");
        errno = EACCES;
        return -1;
    }
    static open_fn real;
    if (!real) real = (open_fn)dlsym(RTLD_NEXT, "open");
    return real(path, flags);
}

int open64(const char* path, int flags, ...) {
    if (flags & WRITE_FLAGS) {
        report("open64(write)");
        errno = EACCES;
        return -1;
    }
    static open_fn real;
    if (!real) real = (open_fn)dlsym(RTLD_NEXT, "open64");
    return real(path, flags);
}

int openat(int dirfd, const char* path, int flags, ...) {
    if (flags & WRITE_FLAGS) {
        report("openat(write)");
        errno = EACCES;
        return -1;
    }
    static openat_fn real;
    if (!real) real = (openat_fn)dlsym(RTLD_NEXT, "openat");
    return real(dirfd, path, flags);
}

int openat64(int dirfd, const char* path, int flags, ...) {
    if (flags & WRITE_FLAGS) {
        report("openat64(write)");
        errno = EACCES;
        return -1;
    }
    static openat_fn real;
    if (!real) real = (openat_fn)dlsym(RTLD_NEXT, "openat64");
    return real(dirfd, path, flags);
}

int creat(const char* path, mode_t mode) {
    (void)path;
    (void)mode;
    report("creat");
    errno = EACCES;
    return -1;
}

static int mode_writes(const char* mode) {
    return mode && (strchr(mode, 'w') || strchr(mode, 'a') || strchr(mode, '+'));
}

FILE* fopen(const char* path, const char* mode) {
    if (mode_writes(mode)) {
        report("fopen(write)");
        errno = EACCES;
        return NULL;
    }
    static fopen_fn real;
    if (!real) real = (fopen_fn)dlsym(RTLD_NEXT, "fopen");
    return real(path, mode);
}

FILE* fopen64(const char* path, const char* mode) {
    if (mode_writes(mode)) {
        report("fopen64(write)");
        errno = EACCES;
        return NULL;
    }
    static fopen_fn real;
    if (!real) real = (fopen_fn)dlsym(RTLD_NEXT, "fopen64");
    return real(path, mode);
}

/* ---- file mutation ---- */

int unlink(const char* path) {
    (void)path;
    report("unlink");
    errno = EACCES;
    return -1;
}

int unlinkat(int dirfd, const char* path, int flags) {
    (void)dirfd;
    (void)path;
    (void)flags;
    report("unlinkat");
    errno = EACCES;
    return -1;
}

int rename(const char* oldp, const char* newp) {
    (void)oldp;
    (void)newp;
    report("rename");
    errno = EACCES;
    return -1;
}

int remove(const char* path) {
    (void)path;
    report("remove");
    errno = EACCES;
    return -1;
}
