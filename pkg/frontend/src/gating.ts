/** Approve-button gate: the exact mirror of the service-side rule. */

import type { FollowUpInterval } from "./types.js";

export function approveEnabled(
  medicationsConfirmed: boolean,
  interval: FollowUpInterval,
): boolean {
  return medicationsConfirmed && interval !== "none_selected";
}

/** Which control blocks approval right now, for the inline hint. */
export function unmetControl(
  medicationsConfirmed: boolean,
  interval: FollowUpInterval,
): "medications_confirmed" | "follow_up_interval" | null {
  if (!medicationsConfirmed) return "medications_confirmed";
  if (interval === "none_selected") return "follow_up_interval";
  return null;
}
