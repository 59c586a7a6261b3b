#include <stdlib.h>

void main() {
    char* buffer = (char*)malloc(256);
    snprintf(buffer, 256, "used");
    free(buffer);
}
