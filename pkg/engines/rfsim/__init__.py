"""Log-distance RF simulator for BLE, WiFi and ZigBee corridors."""
