// Copyright 2026 The safeguard-bench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgbench/catalog.hpp"

#include <cctype>
#include <algorithm>
#include <cstdio>

namespace sgbench {

namespace {

struct Model {
  const char* vendor;
  const char* model;
  DeviceCategory category;
  const char* profile;
  const char* mdns;  // empty when the device does not announce
  const char* upnp;
};

using C = DeviceCategory;

// clang-format off
constexpr Model kModels[] = {
  // Cameras (12)
  {"Wyze", "Cam v2", C::Camera, "camera", "", ""},
  {"Arlo", "Pro 2", C::Camera, "camera", "", ""},
  {"Google", "Nest Cam IQ", C::Camera, "camera", "_nest._tcp", ""},
  {"Ring", "Stick Up Cam", C::Camera, "camera", "", ""},
  {"TP-Link", "Tapo C200", C::Camera, "camera", "", ""},
  {"D-Link", "DCS-8000LH", C::Camera, "camera", "", "urn:schemas-upnp-org:device:Basic:1"},
  {"Amcrest", "IP2M-841", C::Camera, "camera", "", "urn:schemas-upnp-org:device:Basic:1"},
  {"Blink", "XT2", C::Camera, "camera", "", ""},
  {"Yi", "Home Camera 1080p", C::Camera, "camera", "", ""},
  {"Foscam", "FI9821P", C::Camera, "camera", "", "urn:schemas-upnp-org:device:Basic:1"},
  {"Xiaomi", "Mi Home Security 360", C::Camera, "camera", "", ""},
  {"Eufy", "Indoor Cam 2K", C::Camera, "camera", "", ""},
  // Home automation and appliances (39)
  {"TP-Link", "Kasa HS100", C::HomeAutomation, "plug", "", ""},
  {"TP-Link", "Kasa HS110", C::HomeAutomation, "plug", "", ""},
  {"TP-Link", "Kasa KL130", C::HomeAutomation, "plug", "", ""},
  {"Belkin", "Wemo Mini", C::HomeAutomation, "plug", "", "urn:Belkin:device:controllee:1"},
  {"Belkin", "Wemo Insight", C::HomeAutomation, "plug", "", "urn:Belkin:device:insight:1"},
  {"Belkin", "Wemo Dimmer", C::HomeAutomation, "plug", "", "urn:Belkin:device:dimmer:1"},
  {"Meross", "MSS110", C::HomeAutomation, "plug", "", ""},
  {"Gosund", "WP3", C::HomeAutomation, "plug", "", ""},
  {"Teckin", "SP10", C::HomeAutomation, "plug", "", ""},
  {"Wyze", "Plug", C::HomeAutomation, "plug", "", ""},
  {"Amazon", "Smart Plug", C::HomeAutomation, "plug", "", ""},
  {"iDevices", "Switch", C::HomeAutomation, "plug", "_hap._tcp", ""},
  {"Eve", "Energy", C::HomeAutomation, "plug", "_hap._tcp", ""},
  {"LIFX", "Mini White", C::HomeAutomation, "plug", "", ""},
  {"LIFX", "A19", C::HomeAutomation, "plug", "", ""},
  {"Wiz", "Connected Bulb", C::HomeAutomation, "plug", "", ""},
  {"Sengled", "Smart Wi-Fi Bulb", C::HomeAutomation, "plug", "", ""},
  {"Xiaomi", "Yeelight Color", C::HomeAutomation, "plug", "_miio._udp", ""},
  {"Nanoleaf", "Light Panels", C::HomeAutomation, "plug", "_nanoleafapi._tcp", ""},
  {"Google", "Nest Thermostat E", C::HomeAutomation, "hub", "_nest._tcp", ""},
  {"Ecobee", "ecobee4", C::HomeAutomation, "hub", "_hap._tcp", ""},
  {"Honeywell", "Lyric T5", C::HomeAutomation, "hub", "", ""},
  {"Netatmo", "Weather Station", C::HomeAutomation, "hub", "", ""},
  {"Netatmo", "Smart Thermostat", C::HomeAutomation, "hub", "_hap._tcp", ""},
  {"Google", "Nest Protect", C::HomeAutomation, "plug", "", ""},
  {"August", "Smart Lock Pro", C::HomeAutomation, "plug", "", ""},
  {"Yale", "Assure Lock", C::HomeAutomation, "plug", "", ""},
  {"Chamberlain", "MyQ Garage", C::HomeAutomation, "plug", "", ""},
  {"Rachio", "Smart Sprinkler 3", C::HomeAutomation, "plug", "", ""},
  {"iRobot", "Roomba 960", C::HomeAutomation, "hub", "", ""},
  {"Xiaomi", "Mi Robot Vacuum", C::HomeAutomation, "hub", "_miio._udp", ""},
  {"Samsung", "Family Hub Fridge", C::HomeAutomation, "tv", "", "urn:samsung.com:device:RemoteControlReceiver:1"},
  {"LG", "ThinQ Washer", C::HomeAutomation, "hub", "", ""},
  {"GE", "Appliances Wi-Fi Oven", C::HomeAutomation, "plug", "", ""},
  {"Behmor", "Brewer", C::HomeAutomation, "plug", "", ""},
  {"Anova", "Precision Cooker", C::HomeAutomation, "plug", "", ""},
  {"Withings", "Body Cardio", C::HomeAutomation, "plug", "", ""},
  {"Dyson", "Pure Cool Link", C::HomeAutomation, "hub", "", ""},
  {"Awair", "Element", C::HomeAutomation, "plug", "", ""},
  // Hubs (10)
  {"Philips", "Hue Bridge", C::Hub, "hub", "_hue._tcp", "urn:schemas-upnp-org:device:Basic:1"},
  {"Samsung", "SmartThings Hub v3", C::Hub, "hub", "_smartthings._tcp", ""},
  {"Wink", "Hub 2", C::Hub, "hub", "", ""},
  {"Aqara", "Hub M2", C::Hub, "hub", "_hap._tcp", ""},
  {"Hubitat", "Elevation C-7", C::Hub, "hub", "", ""},
  {"Logitech", "Harmony Hub", C::Hub, "hub", "_harmony._tcp", ""},
  {"IKEA", "Tradfri Gateway", C::Hub, "hub", "_coap._udp", ""},
  {"Insteon", "Hub 2245", C::Hub, "hub", "", ""},
  {"Lutron", "Caseta Smart Bridge", C::Hub, "hub", "_lutron._tcp", ""},
  {"Sengled", "Smart Hub", C::Hub, "hub", "", ""},
  // Speakers (13)
  {"Amazon", "Echo Spot", C::Speaker, "echo-spot", "_amzn-wplay._tcp", ""},
  {"Amazon", "Echo Dot 3", C::Speaker, "echo-spot", "_amzn-wplay._tcp", ""},
  {"Amazon", "Echo Plus", C::Speaker, "echo-spot", "_amzn-wplay._tcp", ""},
  {"Amazon", "Echo Show 5", C::Speaker, "echo-spot", "_amzn-wplay._tcp", ""},
  {"Google", "Home", C::Speaker, "google-home", "_googlecast._tcp", ""},
  {"Google", "Home Mini", C::Speaker, "google-home", "_googlecast._tcp", ""},
  {"Google", "Nest Hub", C::Speaker, "google-home", "_googlecast._tcp", ""},
  {"Apple", "HomePod", C::Speaker, "speaker", "_airplay._tcp", ""},
  {"Sonos", "One", C::Speaker, "speaker", "_sonos._tcp", "urn:schemas-upnp-org:device:ZonePlayer:1"},
  {"Sonos", "Beam", C::Speaker, "speaker", "_sonos._tcp", "urn:schemas-upnp-org:device:ZonePlayer:1"},
  {"Harman Kardon", "Invoke", C::Speaker, "speaker", "", ""},
  {"Bose", "Home Speaker 500", C::Speaker, "speaker", "_bose._tcp", "urn:schemas-upnp-org:device:MediaRenderer:1"},
  {"Xiaomi", "Mi AI Speaker", C::Speaker, "speaker", "_miio._udp", ""},
  // Video (5)
  {"Roku", "Express", C::Video, "tv", "", "urn:roku-com:device:player:1-0"},
  {"Amazon", "Fire TV Stick", C::Video, "tv", "_amzn-wplay._tcp", ""},
  {"Google", "Chromecast", C::Video, "tv", "_googlecast._tcp", ""},
  {"Apple", "TV 4K", C::Video, "tv", "_airplay._tcp", ""},
  {"Samsung", "Smart TV", C::Video, "tv", "", "urn:samsung.com:device:RemoteControlReceiver:1"},
};
// clang-format on

// DHCP parameter-request lists by client stack.
const std::vector<std::uint8_t> kOptsLinux{1, 3, 6, 12, 15, 28, 42};
const std::vector<std::uint8_t> kOptsRtos{1, 3, 6};
const std::vector<std::uint8_t> kOptsAndroid{1, 3, 6, 15, 26, 28, 51, 58, 59, 43};
const std::vector<std::uint8_t> kOptsApple{1, 121, 3, 6, 15, 119, 252};
const std::vector<std::uint8_t> kOptsEspressif{1, 3, 28, 6};

const std::vector<std::uint8_t>& dhcp_options_for(std::string_view vendor, DeviceCategory c) {
  if (vendor == "Apple") return kOptsApple;
  if (vendor == "Google" || vendor == "Amazon") return kOptsAndroid;
  if (vendor == "Gosund" || vendor == "Teckin" || vendor == "Meross" || vendor == "Wiz" || vendor == "Sengled") {
    return kOptsEspressif;
  }
  if (c == DeviceCategory::HomeAutomation) return kOptsRtos;
  return kOptsLinux;
}

MacAddress mac_for(std::string_view vendor, std::size_t index) {
  const auto h = stable_hash(vendor);
  MacAddress m;
  // Unicast, globally administered vendor prefix.
  m.bytes[0] = static_cast<std::uint8_t>((h >> 16) & 0xfc);
  m.bytes[1] = static_cast<std::uint8_t>(h >> 8);
  m.bytes[2] = static_cast<std::uint8_t>(h);
  const auto s = stable_hash(std::to_string(index) + std::string(vendor));
  m.bytes[3] = static_cast<std::uint8_t>(index);
  m.bytes[4] = static_cast<std::uint8_t>(s >> 8);
  m.bytes[5] = static_cast<std::uint8_t>(s);
  return m;
}

DeviceDescriptor describe(const Model& m, std::size_t index) {
  DeviceDescriptor d;
  d.true_label = std::string(m.vendor) + " " + m.model;
  d.id = slugify(d.true_label);
  d.mac = mac_for(m.vendor, index);
  d.category = m.category;
  d.profile = m.profile;
  char suffix[8];
  std::snprintf(suffix, sizeof suffix, "%02x%02x", d.mac.bytes[4], d.mac.bytes[5]);
  auto host = slugify(m.model);
  d.facts.dhcp_hostname = slugify(m.vendor) + "-" + host + "-" + suffix;
  d.facts.dhcp_options = dhcp_options_for(m.vendor, m.category);
  if (std::string_view(m.vendor) == "Amazon" || std::string_view(m.vendor) == "Google") {
    d.facts.dhcp_vendor_class = "dhcpcd-6.8.2:Linux-3.10:armv7l";
  }
  if (*m.mdns) d.facts.mdns_services = {m.mdns};
  if (*m.upnp) d.facts.upnp_device_type = m.upnp;
  return d;
}

}  // namespace

std::string slugify(std::string_view label) {
  std::string out;
  bool dash = false;
  for (unsigned char c : label) {
    if (std::isalnum(c)) {
      if (dash && !out.empty()) out.push_back('-');
      out.push_back(static_cast<char>(std::tolower(c)));
      dash = false;
    } else {
      dash = true;
    }
  }
  return out;
}

std::vector<DeviceDescriptor> device_catalog() {
  std::vector<DeviceDescriptor> out;
  std::size_t i = 0;
  for (const auto& m : kModels) out.push_back(describe(m, i++));
  return out;
}

std::vector<DeviceDescriptor> catalog_subset(const std::vector<std::string>& ids) {
  const auto all = device_catalog();
  std::vector<DeviceDescriptor> out;
  for (const auto& id : ids) {
    auto it = std::find_if(all.begin(), all.end(), [&](const DeviceDescriptor& d) { return d.id == id; });
    if (it == all.end()) throw BenchError(ErrorCode::UnknownDevice, "no catalog device '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

std::vector<DeviceDescriptor> benign_month_devices() {
  return catalog_subset({"wyze-cam-v2", "arlo-pro-2", "ring-stick-up-cam", "tp-link-kasa-hs110", "belkin-wemo-mini",
                         "google-nest-thermostat-e", "lifx-a19", "philips-hue-bridge", "samsung-smartthings-hub-v3",
                         "amazon-echo-spot", "google-home", "roku-express"});
}

}  // namespace sgbench
