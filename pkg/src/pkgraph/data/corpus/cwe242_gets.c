#include <stdio.h>

void main() {
    char name[32];
    printf("name: ");
    gets(name);
    printf("hello %s\n", name);
}
