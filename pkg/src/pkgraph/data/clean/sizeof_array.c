#include <string.h>

void main() {
    char dest[64];
    memset(dest, 0, sizeof(dest));
}
