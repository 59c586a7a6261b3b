#include <string.h>

void main() {
    char* dest = (char*)malloc(64);
    memset(dest, 0, sizeof(dest));
    free(dest);
}
