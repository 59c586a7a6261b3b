#include <pwd.h>

void lookup(int uid) {
    char entry[512];
    getpw(uid, entry);
    puts(entry);
}

void main() {
    lookup(1000);
}
