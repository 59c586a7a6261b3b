#include <signal.h>
#include <unistd.h>

void handler(int sig) {
    write(2, "interrupted\n", 12);
}

void main() {
    signal(SIGINT, handler);
    pause();
}
