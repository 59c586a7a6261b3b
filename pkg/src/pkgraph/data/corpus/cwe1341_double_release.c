#include <stdlib.h>

void release(char* handle) {
    free(handle);
}

void main() {
    char* handle = (char*)malloc(32);
    free(handle);
    free(handle);
}
