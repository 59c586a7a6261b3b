#include <signal.h>
#include <syslog.h>

void handler(int sig) {
    syslog(LOG_INFO, "interrupted");
}

void main() {
    signal(SIGINT, handler);
    pause();
}
