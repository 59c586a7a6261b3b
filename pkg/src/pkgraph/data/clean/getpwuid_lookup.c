#include <pwd.h>

void main() {
    struct passwd* entry = getpwuid(0);
    printf("%s\n", entry->pw_name);
}
