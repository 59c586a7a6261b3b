#include <pwd.h>

void main() {
    char pwbuf[512];
    getpw(0, pwbuf);
    printf("%s\n", pwbuf);
}
