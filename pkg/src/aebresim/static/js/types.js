// Payload types of the annotation service JSON API (schema version 1).
export const BUG_FLAGS = ['bbox_overlap', 'implausible_motion', 'other'];
