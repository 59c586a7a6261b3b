#include <stdlib.h>

void main() {
    char input[16];
    fgets(input, 16, stdin);
    int count = atoi(input);
    printf("%d\n", count);
}
