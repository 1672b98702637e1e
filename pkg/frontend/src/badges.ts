/** Urgency badge colors: urgent red, attention amber, stable green. */

import type { UrgencyLabel } from "./types.js";

export const BADGE_COLORS: Record<UrgencyLabel, string> = {
  urgent: "#c62828",
  attention: "#ef6c00",
  stable: "#2e7d32",
};

export function badgeFor(label: UrgencyLabel | null): HTMLSpanElement {
  const badge = document.createElement("span");
  badge.className = label ? `badge badge-${label}` : "badge badge-none";
  badge.textContent = label ?? "untriaged";
  if (label) {
    badge.style.backgroundColor = BADGE_COLORS[label];
  }
  return badge;
}
