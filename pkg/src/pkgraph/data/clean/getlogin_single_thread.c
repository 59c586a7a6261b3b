#include <unistd.h>

void main() {
    char* user = getlogin();
    printf("%s\n", user);
}
